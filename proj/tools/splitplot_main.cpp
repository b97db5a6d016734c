// Command-line front end: POM generation, randomization plans, estimation,
// enumeration-based identity checks, and the coverage experiment.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "splitplot/coverage.hpp"
#include "splitplot/csv.hpp"
#include "splitplot/estimator.hpp"
#include "splitplot/oracle.hpp"
#include "splitplot/simgen.hpp"

namespace {

using namespace splitplot;

void emit(const std::string& path,
          const std::function<void(std::ostream&)>& writer) {
  if (path.empty() || path == "-") {
    writer(std::cout);
  } else {
    write_file_atomic(path, writer);
  }
}

PotentialOutcomeMatrix load_pom(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open POM file: " + path);
  return read_pom_csv(in);
}

struct IdentityCheck {
  std::string name;
  double error;
  double tolerance;
  bool pass() const { return error <= tolerance; }
};

void print_checks(const std::vector<IdentityCheck>& checks, int& failures) {
  for (const IdentityCheck& c : checks) {
    std::ostringstream line;
    line << (c.pass() ? "PASS" : "FAIL") << "  " << c.name
         << "  (max |err| = " << c.error << ", tol = " << c.tolerance << ")";
    std::cout << line.str() << '\n';
    if (!c.pass()) ++failures;
  }
}

int run_enumerate_check(const std::string& pom_path, int W, int M, int W_plus,
                        int M_plus, const std::string& design,
                        std::uint64_t cap) {
  const PotentialOutcomeMatrix pom = load_pom(pom_path);
  if (pom.layout.whole_plots != W || pom.layout.subplots_per_plot != M) {
    throw std::runtime_error("POM layout does not match --W/--M");
  }
  std::vector<IdentityCheck> checks;
  const Eigen::Vector3d tau = factorial_effects(pom).tau;

  if (design == "sp") {
    const SplitPlotSpec spec(pom.layout, W_plus, M_plus);
    ExactMomentsOptions options;
    options.cap = cap;
    const EnumerationReport report = exact_moments(pom, spec, options);

    checks.push_back({"mean of tau_hat equals tau",
                      (report.mean_tau_hat - tau).cwiseAbs().maxCoeff(),
                      1e-10});
    const Eigen::Vector3d var_theory = sampling_variance_sp(pom, spec);
    checks.push_back({"variance of tau_hat equals the closed form",
                      (report.var_tau_hat - var_theory).cwiseAbs().maxCoeff(),
                      1e-9});
    const SamplingMoments moments = theoretical_assignment_moments(spec);
    checks.push_back(
        {"cov(Z*) equals the Kronecker form",
         (report.cov_zstar - moments.full_covariance()).cwiseAbs().maxCoeff(),
         1e-12});
    if (report.has_variance_estimate) {
      const FactorialEffectSummary eff = factorial_effects(pom);
      const Eigen::Vector3d expected_bias =
          eff.effect_variance_between / W;
      checks.push_back({"variance-estimator bias equals its closed form",
                        (report.mean_v_hat - var_theory - expected_bias)
                            .cwiseAbs()
                            .maxCoeff(),
                        1e-9});
      const Eigen::Matrix4d s_mean =
          enumerated_between_sample_cov_mean(pom, spec, cap);
      checks.push_back({"between-plot sample covariance expectation",
                        (s_mean - expected_between_sample_cov(pom, spec))
                            .cwiseAbs()
                            .maxCoeff(),
                        1e-10});
    }
    const Eigen::MatrixXd resid_enum =
        residual_covariance(pom, spec, ResidualCovMode::Enumerated, cap);
    const Eigen::MatrixXd resid_formula =
        residual_covariance(pom, spec, ResidualCovMode::FiniteFormula);
    checks.push_back({"residual covariance equals the finite closed form",
                      (resid_enum - resid_formula).cwiseAbs().maxCoeff(),
                      1e-9});
    double moment_err = 0.0;
    for (const auto [k, l] : {std::pair{1, 1}, {1, 2}, {2, 2}, {3, 3},
                              {3, 4}, {4, 4}}) {
      moment_err = std::max(
          moment_err, (enumerated_indicator_second_moment(spec, k, l, cap) -
                       indicator_second_moment_formula(spec, k, l))
                          .cwiseAbs()
                          .maxCoeff());
    }
    checks.push_back(
        {"indicator second moments equal the three-term form", moment_err,
         1e-12});
    checks.push_back(
        {"whole-plot indicator covariance equals its closed form",
         (enumerated_wholeplot_cov(spec) - wholeplot_cov_formula(spec))
             .cwiseAbs()
             .maxCoeff(),
         1e-12});

    const CompletelyRandomizedSpec cr = cr_counterpart(spec);
    const SamplingMoments cr_moments = theoretical_assignment_moments(cr);
    const double N = pom.layout.units();
    checks.push_back(
        {"coefficient identity (W-1)C_btw + W(M-1)C_in = (N-1)C",
         ((W - 1.0) * moments.coefficient_between +
          W * (M - 1.0) * moments.coefficient_within -
          (N - 1.0) * cr_moments.coefficient)
             .cwiseAbs()
             .maxCoeff(),
         1e-14});
  } else {
    const SplitPlotSpec sp_spec(pom.layout, W_plus, M_plus);
    const CompletelyRandomizedSpec spec = cr_counterpart(sp_spec);
    ExactMomentsOptions options;
    options.cap = cap;
    options.residual_cov = false;
    const EnumerationReport report = exact_moments(pom, spec, options);
    checks.push_back({"mean of tau_hat equals tau",
                      (report.mean_tau_hat - tau).cwiseAbs().maxCoeff(),
                      1e-10});
    const Eigen::Vector3d var_theory = sampling_variance_cr(pom, spec);
    checks.push_back({"variance of tau_hat equals the closed form",
                      (report.var_tau_hat - var_theory).cwiseAbs().maxCoeff(),
                      1e-9});
    const SamplingMoments moments = theoretical_assignment_moments(spec);
    checks.push_back(
        {"cov(Z*) equals the Kronecker form",
         (report.cov_zstar - moments.full_covariance()).cwiseAbs().maxCoeff(),
         1e-12});
  }

  int failures = 0;
  print_checks(checks, failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomization inference for 2x2 split-plot and completely "
               "randomized factorial experiments"};
  app.set_config("--config");
  app.require_subcommand(1);

  // gen-pom
  auto* gen = app.add_subcommand("gen-pom", "Generate a potential outcome "
                                            "matrix CSV from a recipe");
  std::string gen_type = "I", gen_adt = "strict", gen_out;
  int gen_w = 40, gen_m = 40;
  std::uint64_t gen_seed = 0;
  gen->add_option("--po-type", gen_type, "Outcome type I..V");
  gen->add_option("--additivity", gen_adt, "strict|between|none");
  gen->add_option("--W", gen_w, "Whole-plots");
  gen->add_option("--M", gen_m, "Sub-plots per whole-plot");
  gen->add_option("--seed", gen_seed, "Recipe seed");
  gen->add_option("-o,--out", gen_out, "Output path (default stdout)");

  // design
  auto* design = app.add_subcommand("design", "Draw one randomization plan");
  std::string design_kind = "sp", design_out;
  int design_w = 4, design_m = 2, design_wp = -1, design_mp = -1;
  std::uint64_t design_seed = 0;
  design->add_option("--design", design_kind, "sp|cr");
  design->add_option("--W", design_w, "Whole-plots");
  design->add_option("--M", design_m, "Sub-plots per whole-plot");
  design->add_option("--W-plus", design_wp, "Whole-plots at +1 (default W/2)");
  design->add_option("--M-plus", design_mp, "Sub-plots at +1 (default M/2)");
  design->add_option("--seed", design_seed, "Stream seed");
  design->add_option("-o,--out", design_out, "Output path (default stdout)");

  // estimate
  auto* est = app.add_subcommand("estimate", "Point, variance, and interval "
                                             "estimates from observed data");
  std::string est_kind = "sp", est_data, est_out;
  int est_w = 0, est_m = 0, est_wp = -1, est_mp = -1;
  double est_alpha = 0.05;
  est->add_option("--design", est_kind, "sp|cr");
  est->add_option("--W", est_w, "Whole-plots");
  est->add_option("--M", est_m, "Sub-plots per whole-plot");
  est->add_option("--W-plus", est_wp, "Whole-plots at +1 (default W/2)");
  est->add_option("--M-plus", est_mp, "Sub-plots at +1 (default M/2)");
  est->add_option("--data", est_data, "Observed data CSV")->required();
  est->add_option("--alpha", est_alpha, "Interval level");
  est->add_option("-o,--out", est_out, "Output path (default stdout)");

  // enumerate-check
  auto* check = app.add_subcommand(
      "enumerate-check", "Verify the closed-form identities by exhaustive "
                         "enumeration on a small design");
  std::string check_pom, check_kind = "sp";
  int check_w = 4, check_m = 2, check_wp = 2, check_mp = 1;
  std::uint64_t check_cap = kDefaultEnumerationCap;
  check->add_option("--pom", check_pom, "POM CSV")->required();
  check->add_option("--design", check_kind, "sp|cr");
  check->add_option("--W", check_w, "Whole-plots");
  check->add_option("--M", check_m, "Sub-plots per whole-plot");
  check->add_option("--W-plus", check_wp, "Whole-plots at +1");
  check->add_option("--M-plus", check_mp, "Sub-plots at +1");
  check->add_option("--cap", check_cap, "Enumeration cap");

  // simulate-coverage
  auto* sim = app.add_subcommand("simulate-coverage",
                                 "Monte Carlo interval coverage experiment");
  std::string sim_type = "all", sim_adt = "all", sim_methods = "sp,cr",
              sim_out;
  int sim_w = 40, sim_m = 40, sim_wp = -1, sim_mp = -1, sim_reps = 1000,
      sim_workers = 1;
  double sim_alpha = 0.05;
  std::uint64_t sim_seed = 0;
  sim->add_option("--po-type", sim_type, "I..V or all");
  sim->add_option("--additivity", sim_adt, "strict|between|none|all");
  sim->add_option("--W", sim_w, "Whole-plots");
  sim->add_option("--M", sim_m, "Sub-plots per whole-plot");
  sim->add_option("--W-plus", sim_wp, "Whole-plots at +1 (default W/2)");
  sim->add_option("--M-plus", sim_mp, "Sub-plots at +1 (default M/2)");
  sim->add_option("--reps", sim_reps, "Replications per cell");
  sim->add_option("--alpha", sim_alpha, "Interval level");
  sim->add_option("--seed", sim_seed, "Master seed");
  sim->add_option("--methods", sim_methods, "Comma list among sp,cr");
  sim->add_option("--workers", sim_workers, "Worker threads");
  sim->add_option("-o,--out", sim_out, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const PomRecipe recipe{parse_po_type(gen_type), parse_additivity(gen_adt),
                             BlockLayout(gen_w, gen_m), gen_seed};
      const PotentialOutcomeMatrix pom = build_pom(recipe);
      emit(gen_out, [&](std::ostream& out) { write_pom_csv(out, pom); });
      return 0;
    }
    if (*design) {
      const BlockLayout layout(design_w, design_m);
      if (design_wp < 0) design_wp = design_w / 2;
      if (design_mp < 0) design_mp = design_m / 2;
      const SplitPlotSpec spec(layout, design_wp, design_mp);
      SeedStream rng(design_seed);
      const Assignment asg = design_kind == "cr"
                                 ? randomize_cr(cr_counterpart(spec), rng)
                                 : randomize_sp(spec, rng);
      emit(design_out, [&](std::ostream& out) {
        write_assignment_csv(out, asg, layout);
      });
      return 0;
    }
    if (*est) {
      std::ifstream in(est_data);
      if (!in) throw std::runtime_error("cannot open data file: " + est_data);
      const ObservedData data = read_observed_csv(in);
      if (est_w > 0 && (data.layout.whole_plots != est_w ||
                        data.layout.subplots_per_plot != est_m)) {
        throw std::runtime_error("observed data does not match --W/--M");
      }
      EffectEstimate result;
      if (est_kind == "sp") {
        if (est_wp < 0) est_wp = data.layout.whole_plots / 2;
        if (est_mp < 0) est_mp = data.layout.subplots_per_plot / 2;
        const SplitPlotSpec spec(data.layout, est_wp, est_mp);
        result = estimate_sp(data, spec, est_alpha);
      } else if (est_kind == "cr") {
        result = estimate_cr(data, est_alpha);
      } else {
        throw std::runtime_error("--design must be sp or cr");
      }
      emit(est_out,
           [&](std::ostream& out) { write_estimate_csv(out, result); });
      return 0;
    }
    if (*check) {
      return run_enumerate_check(check_pom, check_w, check_m, check_wp,
                                 check_mp, check_kind, check_cap);
    }
    if (*sim) {
      CoverageConfig config;
      config.layout = BlockLayout(sim_w, sim_m);
      config.plots_treated = sim_wp < 0 ? sim_w / 2 : sim_wp;
      config.subplots_treated = sim_mp < 0 ? sim_m / 2 : sim_mp;
      config.replications = sim_reps;
      config.alpha = sim_alpha;
      config.seed = sim_seed;
      config.workers = sim_workers;
      config.run_sp = sim_methods.find("sp") != std::string::npos;
      config.run_cr = sim_methods.find("cr") != std::string::npos;
      if (!config.run_sp && !config.run_cr) {
        throw std::runtime_error("--methods must enable sp and/or cr");
      }
      config.cells.clear();
      const std::vector<PoType> types =
          sim_type == "all" ? std::vector<PoType>{PoType::I, PoType::II,
                                                  PoType::III, PoType::IV,
                                                  PoType::V}
                            : std::vector<PoType>{parse_po_type(sim_type)};
      const std::vector<AdditivityType> adts =
          sim_adt == "all"
              ? std::vector<AdditivityType>{AdditivityType::Strict,
                                            AdditivityType::BetweenBlock,
                                            AdditivityType::None}
              : std::vector<AdditivityType>{parse_additivity(sim_adt)};
      for (PoType t : types) {
        for (AdditivityType a : adts) config.cells.push_back({t, a});
      }
      const CoverageReport report = run_coverage(config);
      emit(sim_out,
           [&](std::ostream& out) { write_coverage_csv(out, report); });
      return 0;
    }
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 1;
  }
  return 0;
}
