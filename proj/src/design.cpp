#include "splitplot/design.hpp"

#include <numeric>
#include <stdexcept>

#include "splitplot/matrix_utils.hpp"

namespace splitplot {

SplitPlotSpec::SplitPlotSpec(BlockLayout layout_in, int plots_treated_in,
                             int subplots_treated_in)
    : layout(layout_in),
      plots_treated(plots_treated_in),
      subplots_treated(subplots_treated_in) {
  if (plots_treated < 1 || plots_treated > layout.whole_plots - 1) {
    throw std::invalid_argument(
        "SplitPlotSpec: need 1 <= W_plus <= W - 1");
  }
  if (subplots_treated < 1 || subplots_treated > layout.subplots_per_plot - 1) {
    throw std::invalid_argument(
        "SplitPlotSpec: need 1 <= M_plus <= M - 1");
  }
}

std::array<int, 4> SplitPlotSpec::arm_sizes() const {
  return {plots_control() * subplots_control(),
          plots_control() * subplots_treated,
          plots_treated * subplots_control(),
          plots_treated * subplots_treated};
}

CompletelyRandomizedSpec::CompletelyRandomizedSpec(
    int units_in, std::array<int, 4> arm_sizes_in)
    : units(units_in), arm_sizes(arm_sizes_in) {
  int total = 0;
  for (int n : arm_sizes) {
    if (n < 1) {
      throw std::invalid_argument(
          "CompletelyRandomizedSpec: every arm size must be >= 1");
    }
    total += n;
  }
  if (total != units) {
    throw std::invalid_argument(
        "CompletelyRandomizedSpec: arm sizes must sum to N");
  }
}

CompletelyRandomizedSpec cr_counterpart(const SplitPlotSpec& spec) {
  return CompletelyRandomizedSpec(spec.layout.units(), spec.arm_sizes());
}

std::array<int, 4> Assignment::arm_counts() const {
  std::array<int, 4> counts{0, 0, 0, 0};
  for (int t : treatment) counts[t - 1] += 1;
  return counts;
}

Eigen::VectorXd Assignment::indicator(int k) const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(units);
  for (int i = 0; i < units; ++i) {
    if (treatment[i] == k) z(i) = 1.0;
  }
  return z;
}

Eigen::VectorXd Assignment::normalized_indicators() const {
  const std::array<int, 4> counts = arm_counts();
  Eigen::VectorXd zstar = Eigen::VectorXd::Zero(4 * units);
  for (int i = 0; i < units; ++i) {
    const int k = treatment[i];
    zstar((k - 1) * units + i) = 1.0 / counts[k - 1];
  }
  return zstar;
}

bool Assignment::plot_constant_factor_a(const BlockLayout& layout_in) const {
  const int M = layout_in.subplots_per_plot;
  for (int w = 0; w < layout_in.whole_plots; ++w) {
    const int first = level_a(treatment[w * M]);
    for (int m = 1; m < M; ++m) {
      if (level_a(treatment[w * M + m]) != first) return false;
    }
  }
  return true;
}

Assignment randomize_cr(const CompletelyRandomizedSpec& spec, SeedStream& rng) {
  std::vector<int> order(spec.units);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  Assignment out;
  out.units = spec.units;
  out.treatment.assign(spec.units, 0);
  int pos = 0;
  for (int k = 1; k <= kNumTreatments; ++k) {
    for (int c = 0; c < spec.arm_sizes[k - 1]; ++c) {
      out.treatment[order[pos++]] = k;
    }
  }
  return out;
}

Assignment randomize_sp(const SplitPlotSpec& spec, SeedStream& rng) {
  const int W = spec.layout.whole_plots;
  const int M = spec.layout.subplots_per_plot;

  std::vector<int> plots(W);
  std::iota(plots.begin(), plots.end(), 0);
  rng.partial_shuffle(plots, spec.plots_treated);
  std::vector<int> a_level(W, -1);
  for (int j = 0; j < spec.plots_treated; ++j) a_level[plots[j]] = +1;

  Assignment out;
  out.units = spec.layout.units();
  out.treatment.assign(out.units, 0);
  out.layout = spec.layout;

  std::vector<int> subplots(M);
  for (int w = 0; w < W; ++w) {
    std::iota(subplots.begin(), subplots.end(), 0);
    rng.partial_shuffle(subplots, spec.subplots_treated);
    std::vector<int> b_level(M, -1);
    for (int j = 0; j < spec.subplots_treated; ++j) b_level[subplots[j]] = +1;
    for (int m = 0; m < M; ++m) {
      out.treatment[spec.layout.unit_index(w, m)] =
          treatment_for_levels(a_level[w], b_level[m]);
    }
  }
  return out;
}

const char* design_name(DesignKind kind) {
  return kind == DesignKind::SplitPlot ? "SP" : "CR";
}

Eigen::VectorXd SamplingMoments::mean() const {
  return Eigen::VectorXd::Constant(4 * units, 1.0 / units);
}

Eigen::MatrixXd SamplingMoments::full_covariance() const {
  if (design == DesignKind::CompletelyRandomized) {
    return kronecker(coefficient, centering_projection(units));
  }
  const int W = layout->whole_plots;
  const int M = layout->subplots_per_plot;
  const Eigen::MatrixXd between = kronecker(
      centering_projection(W), Eigen::MatrixXd::Constant(M, M, 1.0 / M));
  const Eigen::MatrixXd within =
      kronecker(Eigen::MatrixXd::Identity(W, W), centering_projection(M));
  return kronecker(coefficient_between, between) +
         kronecker(coefficient_within, within);
}

SamplingMoments theoretical_assignment_moments(
    const CompletelyRandomizedSpec& spec) {
  SamplingMoments out;
  out.design = DesignKind::CompletelyRandomized;
  out.units = spec.units;
  const double n = spec.units;
  Eigen::Matrix4d c = Eigen::Matrix4d::Constant(-1.0);
  for (int k = 0; k < kNumTreatments; ++k) {
    c(k, k) += n / spec.arm_sizes[k];
  }
  out.coefficient = c / (n * (n - 1.0));
  out.coefficient_between.setZero();
  out.coefficient_within.setZero();
  return out;
}

SamplingMoments theoretical_assignment_moments(const SplitPlotSpec& spec) {
  SamplingMoments out;
  out.design = DesignKind::SplitPlot;
  out.units = spec.layout.units();
  out.layout = spec.layout;

  const double n = out.units;
  const double W = spec.layout.whole_plots;
  const double M = spec.layout.subplots_per_plot;
  const double ra = spec.ratio_a();
  const double rb = spec.ratio_b();

  Eigen::Matrix4d between;
  between << ra, ra, -1, -1,
             ra, ra, -1, -1,
             -1, -1, 1 / ra, 1 / ra,
             -1, -1, 1 / ra, 1 / ra;
  out.coefficient_between = between / (n * (W - 1.0));

  Eigen::Matrix4d within = Eigen::Matrix4d::Zero();
  within.topLeftCorner<2, 2>() << (1 + ra) * rb, -(1 + ra),
                                  -(1 + ra), (1 + ra) / rb;
  within.bottomRightCorner<2, 2>() << (1 + 1 / ra) * rb, -(1 + 1 / ra),
                                      -(1 + 1 / ra), (1 + 1 / ra) / rb;
  out.coefficient_within = within / (n * W * (M - 1.0));

  out.coefficient.setZero();
  return out;
}

}  // namespace splitplot
