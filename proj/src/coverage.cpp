#include "splitplot/coverage.hpp"

#include <stdexcept>
#include <thread>

#include "splitplot/estimator.hpp"
#include "splitplot/rng.hpp"

namespace splitplot {

std::vector<CoverageCell> all_coverage_cells() {
  std::vector<CoverageCell> cells;
  for (PoType t : {PoType::I, PoType::II, PoType::III, PoType::IV, PoType::V}) {
    for (AdditivityType a : {AdditivityType::Strict,
                             AdditivityType::BetweenBlock,
                             AdditivityType::None}) {
      cells.push_back({t, a});
    }
  }
  return cells;
}

namespace {

struct ReplicateResult {
  // Interval bounds per effect; index 0 holds the split-plot method, 1 the
  // completely randomized analysis of the same data.
  double lower[2][3];
  double upper[2][3];
  double tau_hat[3];
};

std::uint64_t cell_tag(const CoverageCell& cell) {
  return static_cast<std::uint64_t>(cell.po_type) * 16 +
         static_cast<std::uint64_t>(cell.additivity);
}

}  // namespace

CoverageReport run_coverage(const CoverageConfig& config) {
  if (config.replications < 1) {
    throw std::invalid_argument("run_coverage: replications must be >= 1");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw std::invalid_argument("run_coverage: need 0 < alpha < 1");
  }
  const SplitPlotSpec spec(config.layout, config.plots_treated,
                           config.subplots_treated);
  if (config.run_sp && !spec.variance_estimable()) {
    throw std::invalid_argument(
        "run_coverage: split-plot intervals need >= 2 whole-plots at each "
        "level of factor A");
  }

  const int R = config.replications;
  const int workers = std::max(1, config.workers);

  CoverageReport report;
  for (const CoverageCell& cell : config.cells) {
    const PomRecipe recipe{
        cell.po_type, cell.additivity, config.layout,
        SeedStream::derive(config.seed, {1, cell_tag(cell)})};
    const PotentialOutcomeMatrix pom = build_pom(recipe);
    const Eigen::Vector3d tau_true = factorial_effects(pom).tau;

    // Replicates land in a preallocated slot per index; the reduction below
    // runs in replicate order, so worker count cannot change the report.
    std::vector<ReplicateResult> results(R);
    auto run_range = [&](int begin, int end) {
      for (int r = begin; r < end; ++r) {
        SeedStream rng(SeedStream::derive(
            config.seed,
            {2, cell_tag(cell), static_cast<std::uint64_t>(r + 1)}));
        const Assignment asg = randomize_sp(spec, rng);
        const ObservedData data = observe(pom, asg);
        const Eigen::Vector3d tau_hat = point_estimates(data);
        ReplicateResult& slot = results[r];
        for (int f = 0; f < kNumEffects; ++f) slot.tau_hat[f] = tau_hat(f);
        if (config.run_sp) {
          const Eigen::Vector3d v = estimate_variance_sp(data, spec);
          const ConfidenceIntervals ci =
              confidence_interval(tau_hat, v, config.alpha);
          for (int f = 0; f < kNumEffects; ++f) {
            slot.lower[0][f] = ci.lower(f);
            slot.upper[0][f] = ci.upper(f);
          }
        }
        if (config.run_cr) {
          const Eigen::Vector3d v = estimate_variance_cr(data);
          const ConfidenceIntervals ci =
              confidence_interval(tau_hat, v, config.alpha);
          for (int f = 0; f < kNumEffects; ++f) {
            slot.lower[1][f] = ci.lower(f);
            slot.upper[1][f] = ci.upper(f);
          }
        }
      }
    };

    if (workers == 1) {
      run_range(0, R);
    } else {
      std::vector<std::thread> pool;
      const int chunk = (R + workers - 1) / workers;
      for (int t = 0; t < workers; ++t) {
        const int begin = t * chunk;
        const int end = std::min(R, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(run_range, begin, end);
      }
      for (std::thread& t : pool) t.join();
    }

    for (int method_index = 0; method_index < 2; ++method_index) {
      const bool enabled = method_index == 0 ? config.run_sp : config.run_cr;
      if (!enabled) continue;
      for (int f = 0; f < kNumEffects; ++f) {
        long covered = 0;
        double width_sum = 0.0;
        double tau_sum = 0.0;
        for (int r = 0; r < R; ++r) {
          const ReplicateResult& slot = results[r];
          // Closed-interval containment: boundary hits count as covered.
          if (tau_true(f) >= slot.lower[method_index][f] &&
              tau_true(f) <= slot.upper[method_index][f]) {
            ++covered;
          }
          width_sum +=
              slot.upper[method_index][f] - slot.lower[method_index][f];
          tau_sum += slot.tau_hat[f];
        }
        CoverageRow row;
        row.po_type = cell.po_type;
        row.additivity = cell.additivity;
        row.effect = static_cast<Effect>(f);
        row.method = method_index == 0 ? DesignKind::SplitPlot
                                       : DesignKind::CompletelyRandomized;
        row.coverage = static_cast<double>(covered) / R;
        row.mean_width = width_sum / R;
        row.mean_tau_hat = tau_sum / R;
        row.tau_true = tau_true(f);
        row.replications = R;
        row.whole_plots = config.layout.whole_plots;
        row.subplots_per_plot = config.layout.subplots_per_plot;
        row.alpha = config.alpha;
        row.seed = config.seed;
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

}  // namespace splitplot
