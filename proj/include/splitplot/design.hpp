#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

#include "splitplot/layout.hpp"
#include "splitplot/rng.hpp"

namespace splitplot {

// Two-stage randomization: W_plus of W whole-plots get the +1 level of
// factor A, then M_plus of M sub-plots within every whole-plot get the +1
// level of factor B.
struct SplitPlotSpec {
  BlockLayout layout;
  int plots_treated;     // W_plus
  int subplots_treated;  // M_plus

  SplitPlotSpec(BlockLayout layout_in, int plots_treated_in,
                int subplots_treated_in);

  int plots_control() const { return layout.whole_plots - plots_treated; }
  int subplots_control() const {
    return layout.subplots_per_plot - subplots_treated;
  }

  double ratio_a() const {
    return static_cast<double>(plots_treated) / plots_control();
  }
  double ratio_b() const {
    return static_cast<double>(subplots_treated) / subplots_control();
  }
  double gamma_a() const { return ratio_a() + 1.0 / ratio_a() + 2.0; }
  double gamma_b() const { return ratio_b() + 1.0 / ratio_b() + 2.0; }

  /// Treatment arm sizes (N_1, N_2, N_3, N_4).
  std::array<int, 4> arm_sizes() const;

  /// Number of whole-plots in which treatment k is observed.
  int plots_observing(int treatment) const {
    return treatment <= 2 ? plots_control() : plots_treated;
  }
  /// Sub-plots per observing whole-plot that land in arm k.
  int subplots_observing(int treatment) const {
    return treatment % 2 == 1 ? subplots_control() : subplots_treated;
  }

  /// Variance estimation needs at least two whole-plots on each side of the
  /// whole-plot randomization; the randomization itself does not.
  bool variance_estimable() const {
    return plots_control() >= 2 && plots_treated >= 2;
  }
};

struct CompletelyRandomizedSpec {
  int units;
  std::array<int, 4> arm_sizes;

  CompletelyRandomizedSpec(int units_in, std::array<int, 4> arm_sizes_in);
};

/// The completely randomized design with the same planned arm sizes.
CompletelyRandomizedSpec cr_counterpart(const SplitPlotSpec& spec);

// One realized allocation: treatment label 1..4 per unit. Carries the block
// layout when produced by (or read back for) a split-plot randomization.
struct Assignment {
  int units = 0;
  std::vector<int> treatment;  // size N, values 1..4
  std::optional<BlockLayout> layout;

  std::array<int, 4> arm_counts() const;
  Eigen::VectorXd indicator(int k) const;
  /// Stacked arm indicators, each scaled by its arm size (4N-vector).
  Eigen::VectorXd normalized_indicators() const;

  int level_a_at(int i) const { return level_a(treatment[i]); }
  int level_b_at(int i) const { return level_b(treatment[i]); }

  /// True when factor A is constant within every whole-plot.
  bool plot_constant_factor_a(const BlockLayout& layout_in) const;
};

Assignment randomize_cr(const CompletelyRandomizedSpec& spec, SeedStream& rng);
Assignment randomize_sp(const SplitPlotSpec& spec, SeedStream& rng);

enum class DesignKind { CompletelyRandomized, SplitPlot };
const char* design_name(DesignKind kind);

// First and second sampling moments of the normalized assignment vector.
// The coefficient matrices are the canonical stored form; the 4N x 4N
// covariance is assembled on demand from the Kronecker structure.
struct SamplingMoments {
  DesignKind design;
  int units;
  std::optional<BlockLayout> layout;
  Eigen::Matrix4d coefficient;          // C, completely randomized
  Eigen::Matrix4d coefficient_between;  // C_btw, split-plot
  Eigen::Matrix4d coefficient_within;   // C_in, split-plot

  Eigen::VectorXd mean() const;
  Eigen::MatrixXd full_covariance() const;
};

SamplingMoments theoretical_assignment_moments(
    const CompletelyRandomizedSpec& spec);
SamplingMoments theoretical_assignment_moments(const SplitPlotSpec& spec);

}  // namespace splitplot
