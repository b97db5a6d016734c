#pragma once

#include <cstdint>
#include <vector>

#include "splitplot/design.hpp"
#include "splitplot/simgen.hpp"

namespace splitplot {

struct CoverageCell {
  PoType po_type;
  AdditivityType additivity;
};

/// All 15 combinations of outcome type and additivity, in fixed order.
std::vector<CoverageCell> all_coverage_cells();

// Monte Carlo coverage experiment: one realized science table per cell, then
// repeated split-plot randomizations of it, with interval estimates computed
// by the enabled methods. Replicate r of a cell depends only on
// (seed, cell, r), so any worker count produces the identical report.
struct CoverageConfig {
  std::vector<CoverageCell> cells = all_coverage_cells();
  BlockLayout layout{40, 40};
  int plots_treated = 20;
  int subplots_treated = 20;
  int replications = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool run_sp = true;
  bool run_cr = true;
  int workers = 1;
};

struct CoverageRow {
  PoType po_type;
  AdditivityType additivity;
  Effect effect;
  DesignKind method;
  double coverage = 0.0;
  double mean_width = 0.0;
  double mean_tau_hat = 0.0;
  double tau_true = 0.0;
  int replications = 0;
  int whole_plots = 0;
  int subplots_per_plot = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;
};

CoverageReport run_coverage(const CoverageConfig& config);

}  // namespace splitplot
