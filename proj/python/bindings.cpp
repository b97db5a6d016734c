#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "splitplot/coverage.hpp"
#include "splitplot/estimator.hpp"
#include "splitplot/oracle.hpp"
#include "splitplot/simgen.hpp"

namespace py = pybind11;
using namespace splitplot;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Randomization inference for 2x2 split-plot and completely "
            "randomized factorial experiments";

  py::enum_<Effect>(m, "Effect")
      .value("A", Effect::A)
      .value("B", Effect::B)
      .value("AB", Effect::AB);

  py::enum_<DesignKind>(m, "DesignKind")
      .value("COMPLETELY_RANDOMIZED", DesignKind::CompletelyRandomized)
      .value("SPLIT_PLOT", DesignKind::SplitPlot);

  py::enum_<PoType>(m, "PoType")
      .value("I", PoType::I)
      .value("II", PoType::II)
      .value("III", PoType::III)
      .value("IV", PoType::IV)
      .value("V", PoType::V);

  py::enum_<AdditivityType>(m, "AdditivityType")
      .value("STRICT", AdditivityType::Strict)
      .value("BETWEEN_BLOCK", AdditivityType::BetweenBlock)
      .value("NONE", AdditivityType::None);

  py::enum_<ResidualCovMode>(m, "ResidualCovMode")
      .value("ENUMERATED", ResidualCovMode::Enumerated)
      .value("FINITE_FORMULA", ResidualCovMode::FiniteFormula)
      .value("ASYMPTOTIC", ResidualCovMode::Asymptotic);

  py::class_<SeedStream>(m, "SeedStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &SeedStream::next_u64)
      .def("next_double", &SeedStream::next_double)
      .def("below", &SeedStream::below, py::arg("n"))
      .def("normal", &SeedStream::normal)
      .def_static(
          "derive",
          [](std::uint64_t seed, const std::vector<std::uint64_t>& tags) {
            return SeedStream::derive_range(seed, tags.begin(), tags.end());
          },
          py::arg("seed"), py::arg("tags"));

  py::class_<BlockLayout>(m, "BlockLayout")
      .def(py::init<int, int>(), py::arg("whole_plots"),
           py::arg("subplots_per_plot"))
      .def_readonly("whole_plots", &BlockLayout::whole_plots)
      .def_readonly("subplots_per_plot", &BlockLayout::subplots_per_plot)
      .def_property_readonly("units", &BlockLayout::units)
      .def("__eq__", [](const BlockLayout& a, const BlockLayout& b) {
        return a == b;
      });

  py::class_<PotentialOutcomeMatrix>(m, "PotentialOutcomeMatrix")
      .def(py::init<BlockLayout, Eigen::MatrixXd>(), py::arg("layout"),
           py::arg("values"))
      .def_readonly("layout", &PotentialOutcomeMatrix::layout)
      .def_readonly("values", &PotentialOutcomeMatrix::values)
      .def("column_means", &PotentialOutcomeMatrix::column_means)
      .def("block_means", &PotentialOutcomeMatrix::block_means);

  py::class_<Projections>(m, "Projections")
      .def_readonly("grand", &Projections::grand)
      .def_readonly("within", &Projections::within)
      .def_readonly("between", &Projections::between);
  m.def("build_projections", &build_projections, py::arg("layout"));

  py::class_<CovarianceSummary>(m, "CovarianceSummary")
      .def_readonly("total", &CovarianceSummary::total)
      .def_readonly("between", &CovarianceSummary::between)
      .def_readonly("within", &CovarianceSummary::within)
      .def_readonly("per_block", &CovarianceSummary::per_block);
  m.def("summarize_covariances", &summarize_covariances, py::arg("pom"));

  py::class_<FactorialEffectSummary>(m, "FactorialEffectSummary")
      .def_readonly("tau", &FactorialEffectSummary::tau)
      .def_readonly("tau_block", &FactorialEffectSummary::tau_block)
      .def_readonly("tau_unit", &FactorialEffectSummary::tau_unit)
      .def_readonly("effect_variance",
                    &FactorialEffectSummary::effect_variance)
      .def_readonly("effect_variance_between",
                    &FactorialEffectSummary::effect_variance_between)
      .def_readonly("effect_variance_within",
                    &FactorialEffectSummary::effect_variance_within)
      .def_readonly("mu_unit", &FactorialEffectSummary::mu_unit)
      .def_readonly("mu_variance_between",
                    &FactorialEffectSummary::mu_variance_between)
      .def_readonly("mu_variance_within",
                    &FactorialEffectSummary::mu_variance_within);
  m.def("factorial_effects", &factorial_effects, py::arg("pom"));

  py::class_<AdditivityReport>(m, "AdditivityReport")
      .def_readonly("strict", &AdditivityReport::strict)
      .def_readonly("between_block", &AdditivityReport::between_block)
      .def_readonly("within_block", &AdditivityReport::within_block)
      .def_readonly("tolerance", &AdditivityReport::tolerance)
      .def_readonly("constants", &AdditivityReport::constants)
      .def_readonly("block_constants", &AdditivityReport::block_constants);
  m.def("classify_additivity", &classify_additivity, py::arg("pom"),
        py::arg("tolerance") = 1e-9);

  py::class_<SplitPlotSpec>(m, "SplitPlotSpec")
      .def(py::init<BlockLayout, int, int>(), py::arg("layout"),
           py::arg("plots_treated"), py::arg("subplots_treated"))
      .def_readonly("layout", &SplitPlotSpec::layout)
      .def_readonly("plots_treated", &SplitPlotSpec::plots_treated)
      .def_readonly("subplots_treated", &SplitPlotSpec::subplots_treated)
      .def_property_readonly("plots_control", &SplitPlotSpec::plots_control)
      .def_property_readonly("subplots_control",
                             &SplitPlotSpec::subplots_control)
      .def_property_readonly("ratio_a", &SplitPlotSpec::ratio_a)
      .def_property_readonly("ratio_b", &SplitPlotSpec::ratio_b)
      .def_property_readonly("gamma_a", &SplitPlotSpec::gamma_a)
      .def_property_readonly("gamma_b", &SplitPlotSpec::gamma_b)
      .def_property_readonly("arm_sizes", &SplitPlotSpec::arm_sizes)
      .def_property_readonly("variance_estimable",
                             &SplitPlotSpec::variance_estimable);

  py::class_<CompletelyRandomizedSpec>(m, "CompletelyRandomizedSpec")
      .def(py::init<int, std::array<int, 4>>(), py::arg("units"),
           py::arg("arm_sizes"))
      .def_readonly("units", &CompletelyRandomizedSpec::units)
      .def_readonly("arm_sizes", &CompletelyRandomizedSpec::arm_sizes);
  m.def("cr_counterpart", &cr_counterpart, py::arg("spec"));

  py::class_<Assignment>(m, "Assignment")
      .def_readonly("units", &Assignment::units)
      .def_readonly("treatment", &Assignment::treatment)
      .def_property_readonly("arm_counts", &Assignment::arm_counts)
      .def("indicator", &Assignment::indicator, py::arg("treatment"))
      .def("normalized_indicators", &Assignment::normalized_indicators);

  m.def("randomize_cr", &randomize_cr, py::arg("spec"), py::arg("rng"));
  m.def("randomize_sp", &randomize_sp, py::arg("spec"), py::arg("rng"));

  py::class_<SamplingMoments>(m, "SamplingMoments")
      .def_readonly("design", &SamplingMoments::design)
      .def_readonly("coefficient", &SamplingMoments::coefficient)
      .def_readonly("coefficient_between",
                    &SamplingMoments::coefficient_between)
      .def_readonly("coefficient_within", &SamplingMoments::coefficient_within)
      .def("mean", &SamplingMoments::mean)
      .def("full_covariance", &SamplingMoments::full_covariance);
  m.def("theoretical_assignment_moments",
        py::overload_cast<const SplitPlotSpec&>(
            &theoretical_assignment_moments),
        py::arg("spec"));
  m.def("theoretical_assignment_moments",
        py::overload_cast<const CompletelyRandomizedSpec&>(
            &theoretical_assignment_moments),
        py::arg("spec"));

  py::class_<ObservedData>(m, "ObservedData")
      .def_readonly("layout", &ObservedData::layout)
      .def_readonly("assignment", &ObservedData::assignment)
      .def_readonly("outcomes", &ObservedData::outcomes)
      .def_readonly("arm_means", &ObservedData::arm_means);
  m.def("observe", &observe, py::arg("pom"), py::arg("assignment"));
  m.def("point_estimates", &point_estimates, py::arg("data"));
  m.def("sampling_variance_cr", &sampling_variance_cr, py::arg("pom"),
        py::arg("spec"));
  m.def("sampling_variance_sp", &sampling_variance_sp, py::arg("pom"),
        py::arg("spec"));
  m.def("estimate_variance_sp", &estimate_variance_sp, py::arg("data"),
        py::arg("spec"));
  m.def("estimate_variance_cr", &estimate_variance_cr, py::arg("data"));

  py::class_<SpecialCaseReport>(m, "SpecialCaseReport")
      .def_readonly("sp_variance", &SpecialCaseReport::sp_variance)
      .def_readonly("cr_variance", &SpecialCaseReport::cr_variance)
      .def_readonly("discriminant", &SpecialCaseReport::discriminant)
      .def_readonly("sp_minus_cr", &SpecialCaseReport::sp_minus_cr)
      .def_readonly("predicted_sign", &SpecialCaseReport::predicted_sign);
  m.def("closed_form_special_cases", &closed_form_special_cases,
        py::arg("spec"), py::arg("between_var"), py::arg("within_var"));

  py::class_<ConfidenceIntervals>(m, "ConfidenceIntervals")
      .def_readonly("lower", &ConfidenceIntervals::lower)
      .def_readonly("upper", &ConfidenceIntervals::upper)
      .def_readonly("alpha", &ConfidenceIntervals::alpha);
  m.def("confidence_interval", &confidence_interval, py::arg("tau_hat"),
        py::arg("v_hat"), py::arg("alpha"));
  m.def("normal_quantile", &normal_quantile, py::arg("p"));

  py::class_<EffectEstimate>(m, "EffectEstimate")
      .def_readonly("tau_hat", &EffectEstimate::tau_hat)
      .def_readonly("v_hat", &EffectEstimate::v_hat)
      .def_readonly("ci", &EffectEstimate::ci)
      .def_readonly("method", &EffectEstimate::method)
      .def_readonly("alpha", &EffectEstimate::alpha);
  m.def("estimate_sp", &estimate_sp, py::arg("data"), py::arg("spec"),
        py::arg("alpha") = 0.05);
  m.def("estimate_cr", &estimate_cr, py::arg("data"), py::arg("alpha") = 0.05);

  m.def("count_assignments",
        py::overload_cast<const SplitPlotSpec&>(&count_assignments),
        py::arg("spec"));
  m.def("count_assignments",
        py::overload_cast<const CompletelyRandomizedSpec&>(&count_assignments),
        py::arg("spec"));

  py::class_<ExactMomentsOptions>(m, "ExactMomentsOptions")
      .def(py::init<>())
      .def_readwrite("cov_zstar", &ExactMomentsOptions::cov_zstar)
      .def_readwrite("residual_cov", &ExactMomentsOptions::residual_cov)
      .def_readwrite("variance_estimate",
                     &ExactMomentsOptions::variance_estimate)
      .def_readwrite("cap", &ExactMomentsOptions::cap);

  py::class_<EnumerationReport>(m, "EnumerationReport")
      .def_readonly("assignment_count", &EnumerationReport::assignment_count)
      .def_readonly("mean_tau_hat", &EnumerationReport::mean_tau_hat)
      .def_readonly("var_tau_hat", &EnumerationReport::var_tau_hat)
      .def_readonly("mean_v_hat", &EnumerationReport::mean_v_hat)
      .def_readonly("has_variance_estimate",
                    &EnumerationReport::has_variance_estimate)
      .def_readonly("cov_zstar", &EnumerationReport::cov_zstar)
      .def_readonly("residual_cov", &EnumerationReport::residual_cov);
  m.def("exact_moments",
        py::overload_cast<const PotentialOutcomeMatrix&, const SplitPlotSpec&,
                          const ExactMomentsOptions&>(&exact_moments),
        py::arg("pom"), py::arg("spec"),
        py::arg("options") = ExactMomentsOptions{});
  m.def("exact_moments",
        py::overload_cast<const PotentialOutcomeMatrix&,
                          const CompletelyRandomizedSpec&,
                          const ExactMomentsOptions&>(&exact_moments),
        py::arg("pom"), py::arg("spec"),
        py::arg("options") = ExactMomentsOptions{});

  m.def("residuals", &residuals, py::arg("pom"), py::arg("assignment"));
  m.def("residual_covariance", &residual_covariance, py::arg("pom"),
        py::arg("spec"), py::arg("mode"),
        py::arg("cap") = kDefaultEnumerationCap);

  py::class_<PomRecipe>(m, "PomRecipe")
      .def(py::init<PoType, AdditivityType, BlockLayout, std::uint64_t>(),
           py::arg("po_type"), py::arg("additivity"), py::arg("layout"),
           py::arg("seed"))
      .def_readonly("po_type", &PomRecipe::po_type)
      .def_readonly("additivity", &PomRecipe::additivity)
      .def_readonly("layout", &PomRecipe::layout)
      .def_readonly("seed", &PomRecipe::seed);
  m.def("generate_y1", &generate_y1, py::arg("recipe"));
  m.def("build_pom", &build_pom, py::arg("recipe"));

  py::class_<CoverageCell>(m, "CoverageCell")
      .def(py::init<PoType, AdditivityType>(), py::arg("po_type"),
           py::arg("additivity"))
      .def_readonly("po_type", &CoverageCell::po_type)
      .def_readonly("additivity", &CoverageCell::additivity);
  m.def("all_coverage_cells", &all_coverage_cells);

  py::class_<CoverageConfig>(m, "CoverageConfig")
      .def(py::init<>())
      .def_readwrite("cells", &CoverageConfig::cells)
      .def_readwrite("layout", &CoverageConfig::layout)
      .def_readwrite("plots_treated", &CoverageConfig::plots_treated)
      .def_readwrite("subplots_treated", &CoverageConfig::subplots_treated)
      .def_readwrite("replications", &CoverageConfig::replications)
      .def_readwrite("alpha", &CoverageConfig::alpha)
      .def_readwrite("seed", &CoverageConfig::seed)
      .def_readwrite("run_sp", &CoverageConfig::run_sp)
      .def_readwrite("run_cr", &CoverageConfig::run_cr)
      .def_readwrite("workers", &CoverageConfig::workers);

  py::class_<CoverageRow>(m, "CoverageRow")
      .def_readonly("po_type", &CoverageRow::po_type)
      .def_readonly("additivity", &CoverageRow::additivity)
      .def_readonly("effect", &CoverageRow::effect)
      .def_readonly("method", &CoverageRow::method)
      .def_readonly("coverage", &CoverageRow::coverage)
      .def_readonly("mean_width", &CoverageRow::mean_width)
      .def_readonly("mean_tau_hat", &CoverageRow::mean_tau_hat)
      .def_readonly("tau_true", &CoverageRow::tau_true)
      .def_readonly("replications", &CoverageRow::replications)
      .def_readonly("whole_plots", &CoverageRow::whole_plots)
      .def_readonly("subplots_per_plot", &CoverageRow::subplots_per_plot)
      .def_readonly("alpha", &CoverageRow::alpha)
      .def_readonly("seed", &CoverageRow::seed);

  py::class_<CoverageReport>(m, "CoverageReport")
      .def_readonly("rows", &CoverageReport::rows);
  m.def("run_coverage", &run_coverage, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
}
