#include <doctest.h>

#include <sstream>

#include "splitplot/coverage.hpp"
#include "splitplot/csv.hpp"

using namespace splitplot;

namespace {

CoverageConfig small_config() {
  CoverageConfig config;
  config.cells = {{PoType::II, AdditivityType::Strict},
                  {PoType::IV, AdditivityType::None}};
  config.layout = BlockLayout(6, 4);
  config.plots_treated = 3;
  config.subplots_treated = 2;
  config.replications = 40;
  config.seed = 99;
  return config;
}

bool reports_equal(const CoverageReport& a, const CoverageReport& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const CoverageRow& x = a.rows[i];
    const CoverageRow& y = b.rows[i];
    if (x.coverage != y.coverage || x.mean_width != y.mean_width ||
        x.mean_tau_hat != y.mean_tau_hat || x.tau_true != y.tau_true) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("coverage report has one row per cell, effect, and method") {
  const CoverageReport report = run_coverage(small_config());
  CHECK(report.rows.size() == 2 * 3 * 2);
  for (const CoverageRow& row : report.rows) {
    CHECK(row.coverage >= 0.0);
    CHECK(row.coverage <= 1.0);
    CHECK(row.mean_width >= 0.0);
    CHECK(row.replications == 40);
  }
}

TEST_CASE("identical seeds give bitwise-identical reports") {
  const CoverageReport a = run_coverage(small_config());
  const CoverageReport b = run_coverage(small_config());
  CHECK(reports_equal(a, b));

  CoverageConfig other = small_config();
  other.seed = 100;
  CHECK_FALSE(reports_equal(a, run_coverage(other)));
}

TEST_CASE("worker count does not change the report") {
  CoverageConfig parallel = small_config();
  parallel.workers = 4;
  CHECK(reports_equal(run_coverage(small_config()), run_coverage(parallel)));
}

TEST_CASE("single-method runs produce only that method") {
  CoverageConfig config = small_config();
  config.run_cr = false;
  const CoverageReport report = run_coverage(config);
  CHECK(report.rows.size() == 2 * 3);
  for (const CoverageRow& row : report.rows) {
    CHECK(row.method == DesignKind::SplitPlot);
  }
}

TEST_CASE("coverage rejects invalid configurations") {
  CoverageConfig config = small_config();
  config.replications = 0;
  CHECK_THROWS(run_coverage(config));

  config = small_config();
  config.alpha = 1.5;
  CHECK_THROWS(run_coverage(config));

  config = small_config();
  config.plots_treated = 1;  // too few for interval estimation
  CHECK_THROWS(run_coverage(config));
}

TEST_CASE("coverage CSV uses the fixed schema") {
  CoverageConfig config = small_config();
  config.replications = 5;
  const CoverageReport report = run_coverage(config);
  std::ostringstream out;
  write_coverage_csv(out, report);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "po_type,additivity,effect,method,coverage,mean_width,tau_true,reps,"
        "W,M,alpha,seed");
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++lines;
  }
  CHECK(lines == static_cast<int>(report.rows.size()));
}

TEST_CASE("mean interval width stabilizes across replicate streams") {
  // Same realized science table, two independent batches of 1000
  // randomizations: the mean split-plot interval widths agree within 1%.
  const BlockLayout layout(40, 40);
  const SplitPlotSpec spec(layout, 20, 20);
  const PotentialOutcomeMatrix pom =
      build_pom(PomRecipe{PoType::III, AdditivityType::None, layout, 3});
  auto mean_widths = [&](std::uint64_t seed) {
    Eigen::Vector3d total = Eigen::Vector3d::Zero();
    const int reps = 1000;
    for (int r = 0; r < reps; ++r) {
      SeedStream rng(SeedStream::derive(seed, {static_cast<std::uint64_t>(r)}));
      const ObservedData data = observe(pom, randomize_sp(spec, rng));
      const EffectEstimate est = estimate_sp(data, spec, 0.05);
      total += est.ci.upper - est.ci.lower;
    }
    return Eigen::Vector3d(total / reps);
  };
  const Eigen::Vector3d first = mean_widths(101);
  const Eigen::Vector3d second = mean_widths(202);
  for (int f = 0; f < 3; ++f) {
    CHECK(std::abs(first(f) / second(f) - 1.0) < 0.01);
  }
}

TEST_CASE("csv round-trips for science tables and observed data") {
  const PomRecipe recipe{PoType::IV, AdditivityType::None, BlockLayout(4, 3),
                         8};
  const PotentialOutcomeMatrix pom = build_pom(recipe);
  std::ostringstream out;
  write_pom_csv(out, pom);
  std::istringstream in(out.str());
  const PotentialOutcomeMatrix loaded = read_pom_csv(in);
  CHECK(loaded.layout == pom.layout);
  CHECK((loaded.values - pom.values).cwiseAbs().maxCoeff() == 0.0);

  const SplitPlotSpec spec(pom.layout, 2, 1);
  SeedStream rng(4);
  const ObservedData data = observe(pom, randomize_sp(spec, rng));
  std::ostringstream obs_out;
  write_observed_csv(obs_out, data);
  std::istringstream obs_in(obs_out.str());
  const ObservedData loaded_data = read_observed_csv(obs_in);
  CHECK(loaded_data.assignment.treatment == data.assignment.treatment);
  CHECK((loaded_data.outcomes - data.outcomes).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded_data.arm_means - data.arm_means).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("pom csv loader validates its input") {
  std::istringstream bad_header("a,b,c\n");
  CHECK_THROWS(read_pom_csv(bad_header));

  std::istringstream missing_row(
      "whole_plot,sub_plot,y1,y2,y3,y4\n"
      "1,1,0,0,0,0\n"
      "1,2,0,0,0,0\n"
      "2,1,0,0,0,0\n");
  CHECK_THROWS(read_pom_csv(missing_row));

  std::istringstream duplicate(
      "whole_plot,sub_plot,y1,y2,y3,y4\n"
      "1,1,0,0,0,0\n"
      "1,1,0,0,0,0\n"
      "1,2,0,0,0,0\n"
      "2,1,0,0,0,0\n"
      "2,2,0,0,0,0\n");
  CHECK_THROWS(read_pom_csv(duplicate));

  // Rows may arrive in any order.
  std::istringstream shuffled(
      "whole_plot,sub_plot,y1,y2,y3,y4\n"
      "2,2,4,4,4,4\n"
      "1,1,1,1,1,1\n"
      "2,1,3,3,3,3\n"
      "1,2,2,2,2,2\n");
  const PotentialOutcomeMatrix pom = read_pom_csv(shuffled);
  CHECK(pom.values(0, 0) == 1.0);
  CHECK(pom.values(1, 0) == 2.0);
  CHECK(pom.values(2, 0) == 3.0);
  CHECK(pom.values(3, 0) == 4.0);
}
