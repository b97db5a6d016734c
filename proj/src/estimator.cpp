#include "splitplot/estimator.hpp"

#include <stdexcept>

namespace splitplot {

namespace {

Eigen::Vector4d observed_arm_means(const Assignment& assignment,
                                   const Eigen::VectorXd& outcomes) {
  Eigen::Vector4d sums = Eigen::Vector4d::Zero();
  const std::array<int, 4> counts = assignment.arm_counts();
  for (int k = 0; k < kNumTreatments; ++k) {
    if (counts[k] == 0) {
      throw std::domain_error("observed data: treatment arm is empty");
    }
  }
  for (int i = 0; i < assignment.units; ++i) {
    sums(assignment.treatment[i] - 1) += outcomes(i);
  }
  for (int k = 0; k < kNumTreatments; ++k) sums(k) /= counts[k];
  return sums;
}

// Per-plot averages of the observed outcomes, one column per treatment.
// Entry (w, k) is meaningful only when arm k+1 is observed in plot w.
Eigen::MatrixXd plot_arm_means(const ObservedData& data) {
  const int W = data.layout.whole_plots;
  const int M = data.layout.subplots_per_plot;
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(W, kNumTreatments);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(W, kNumTreatments);
  for (int w = 0; w < W; ++w) {
    for (int m = 0; m < M; ++m) {
      const int i = data.layout.unit_index(w, m);
      const int k = data.assignment.treatment[i] - 1;
      sums(w, k) += data.outcomes(i);
      counts(w, k) += 1.0;
    }
  }
  return (counts.array() > 0.0).select(sums.array() / counts.array(), 0.0);
}

void check_split_plot_validity(const ObservedData& data,
                               const SplitPlotSpec& spec) {
  if (!(data.layout == spec.layout)) {
    throw std::invalid_argument("estimate_variance_sp: layout mismatch");
  }
  const int M = spec.layout.subplots_per_plot;
  int plots_plus = 0;
  for (int w = 0; w < spec.layout.whole_plots; ++w) {
    const int a = data.assignment.level_a_at(data.layout.unit_index(w, 0));
    int subplots_plus = 0;
    for (int m = 0; m < M; ++m) {
      const int i = data.layout.unit_index(w, m);
      if (data.assignment.level_a_at(i) != a) {
        throw std::invalid_argument(
            "estimate_variance_sp: factor A varies within a whole-plot");
      }
      if (data.assignment.level_b_at(i) > 0) ++subplots_plus;
    }
    if (subplots_plus != spec.subplots_treated) {
      throw std::invalid_argument(
          "estimate_variance_sp: sub-plot counts do not match the design");
    }
    if (a > 0) ++plots_plus;
  }
  if (plots_plus != spec.plots_treated) {
    throw std::invalid_argument(
        "estimate_variance_sp: whole-plot counts do not match the design");
  }
}

}  // namespace

ObservedData observe(const PotentialOutcomeMatrix& pom,
                     const Assignment& assignment) {
  if (assignment.units != pom.layout.units()) {
    throw std::invalid_argument("observe: assignment size differs from POM");
  }
  if (assignment.layout && !(*assignment.layout == pom.layout)) {
    throw std::invalid_argument("observe: layout mismatch");
  }
  Eigen::VectorXd y(assignment.units);
  for (int i = 0; i < assignment.units; ++i) {
    y(i) = pom.values(i, assignment.treatment[i] - 1);
  }
  return make_observed_data(pom.layout, assignment, std::move(y));
}

ObservedData make_observed_data(const BlockLayout& layout,
                                Assignment assignment,
                                Eigen::VectorXd outcomes) {
  if (assignment.units != layout.units() ||
      outcomes.size() != layout.units()) {
    throw std::invalid_argument("make_observed_data: size mismatch");
  }
  ObservedData data{layout, std::move(assignment), std::move(outcomes),
                    Eigen::Vector4d::Zero()};
  data.arm_means = observed_arm_means(data.assignment, data.outcomes);
  return data;
}

Eigen::Vector3d point_estimates(const ObservedData& data) {
  return 0.5 * contrast_columns().transpose() * data.arm_means;
}

Eigen::Vector3d sampling_variance_cr(const PotentialOutcomeMatrix& pom,
                                     const CompletelyRandomizedSpec& spec) {
  if (spec.units != pom.layout.units()) {
    throw std::invalid_argument("sampling_variance_cr: size mismatch");
  }
  const SamplingMoments moments = theoretical_assignment_moments(spec);
  const CovarianceSummary cov = summarize_covariances(pom);
  const Eigen::Matrix4d weighted =
      (spec.units - 1.0) * moments.coefficient.cwiseProduct(cov.total);
  Eigen::Vector3d out;
  for (int f = 0; f < kNumEffects; ++f) {
    const Eigen::Vector4d g = contrast(static_cast<Effect>(f));
    out(f) = 0.25 * g.dot(weighted * g);
  }
  return out;
}

Eigen::Vector3d sampling_variance_sp(const PotentialOutcomeMatrix& pom,
                                     const SplitPlotSpec& spec) {
  if (!(spec.layout == pom.layout)) {
    throw std::invalid_argument("sampling_variance_sp: layout mismatch");
  }
  const double W = spec.layout.whole_plots;
  const double M = spec.layout.subplots_per_plot;
  const SamplingMoments moments = theoretical_assignment_moments(spec);
  const CovarianceSummary cov = summarize_covariances(pom);
  const Eigen::Matrix4d weighted =
      (W - 1.0) * M * moments.coefficient_between.cwiseProduct(cov.between) +
      W * (M - 1.0) * moments.coefficient_within.cwiseProduct(cov.within);
  Eigen::Vector3d out;
  for (int f = 0; f < kNumEffects; ++f) {
    const Eigen::Vector4d g = contrast(static_cast<Effect>(f));
    out(f) = 0.25 * g.dot(weighted * g);
  }
  return out;
}

SpecialCaseReport closed_form_special_cases(const SplitPlotSpec& spec,
                                            double between_var,
                                            double within_var) {
  if (between_var < 0.0 || within_var < 0.0) {
    throw std::invalid_argument(
        "closed_form_special_cases: variances must be >= 0");
  }
  const double W = spec.layout.whole_plots;
  const double M = spec.layout.subplots_per_plot;
  const double N = spec.layout.units();
  const double ga = spec.gamma_a();
  const double gb = spec.gamma_b();

  SpecialCaseReport out;
  out.sp_variance(0) =
      ga * between_var / W + ga * (gb - 4.0) * within_var / (4.0 * N);
  out.sp_variance(1) = ga * gb * within_var / (4.0 * N);
  out.sp_variance(2) = out.sp_variance(1);
  out.cr_variance = ga * gb / (4.0 * (N - 1.0)) *
                    ((W - 1.0) / W * between_var +
                     (M - 1.0) / M * within_var);
  out.discriminant = between_var - within_var / M;
  out.sp_minus_cr = out.sp_variance.array() - out.cr_variance;
  out.predicted_sign = {0, 0, 0};
  if (out.discriminant != 0.0) {
    const int sign = out.discriminant > 0.0 ? 1 : -1;
    out.predicted_sign = {sign, -sign, -sign};
  }
  return out;
}

Eigen::Matrix4d sample_between_covariances(const ObservedData& data,
                                           const SplitPlotSpec& spec) {
  if (!spec.variance_estimable()) {
    throw std::domain_error(
        "sample_between_covariances: needs >= 2 whole-plots at each level "
        "of factor A");
  }
  check_split_plot_validity(data, spec);

  const Eigen::MatrixXd plot_means = plot_arm_means(data);
  const int W = spec.layout.whole_plots;

  Eigen::Matrix2d cov_low = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d cov_high = Eigen::Matrix2d::Zero();
  for (int w = 0; w < W; ++w) {
    const int a = data.assignment.level_a_at(data.layout.unit_index(w, 0));
    if (a < 0) {
      const Eigen::Vector2d dev(plot_means(w, 0) - data.arm_means(0),
                                plot_means(w, 1) - data.arm_means(1));
      cov_low += dev * dev.transpose();
    } else {
      const Eigen::Vector2d dev(plot_means(w, 2) - data.arm_means(2),
                                plot_means(w, 3) - data.arm_means(3));
      cov_high += dev * dev.transpose();
    }
  }
  cov_low /= spec.plots_control() - 1;
  cov_high /= spec.plots_treated - 1;

  Eigen::Matrix4d out = Eigen::Matrix4d::Zero();
  out.topLeftCorner<2, 2>() = cov_low;
  out.bottomRightCorner<2, 2>() = cov_high;
  return out;
}

Eigen::Vector3d estimate_variance_sp(const ObservedData& data,
                                     const SplitPlotSpec& spec) {
  const Eigen::Matrix4d between = sample_between_covariances(data, spec);
  Eigen::Vector3d out;
  for (int f = 0; f < kNumEffects; ++f) {
    const Eigen::Vector4d g = contrast(static_cast<Effect>(f));
    const Eigen::Vector2d g_low = g.head<2>();
    const Eigen::Vector2d g_high = g.tail<2>();
    out(f) = 0.25 * (g_low.dot(between.topLeftCorner<2, 2>() * g_low) /
                         spec.plots_control() +
                     g_high.dot(between.bottomRightCorner<2, 2>() * g_high) /
                         spec.plots_treated);
  }
  return out;
}

Eigen::Vector3d estimate_variance_cr(const ObservedData& data) {
  const std::array<int, 4> counts = data.assignment.arm_counts();
  double total = 0.0;
  for (int k = 0; k < kNumTreatments; ++k) {
    if (counts[k] < 2) {
      throw std::domain_error(
          "estimate_variance_cr: every arm needs >= 2 units");
    }
    double ss = 0.0;
    for (int i = 0; i < data.assignment.units; ++i) {
      if (data.assignment.treatment[i] == k + 1) {
        const double dev = data.outcomes(i) - data.arm_means(k);
        ss += dev * dev;
      }
    }
    const double sample_var = ss / (counts[k] - 1);
    total += sample_var / counts[k];
  }
  return Eigen::Vector3d::Constant(0.25 * total);
}

ConfidenceIntervals confidence_interval(const Eigen::Vector3d& tau_hat,
                                        const Eigen::Vector3d& v_hat,
                                        double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("confidence_interval: need 0 < alpha < 1");
  }
  if ((v_hat.array() < 0.0).any()) {
    throw std::invalid_argument(
        "confidence_interval: variance estimates must be >= 0");
  }
  const double q = normal_quantile(1.0 - alpha / 2.0);
  ConfidenceIntervals ci;
  ci.alpha = alpha;
  const Eigen::Vector3d half_width = q * v_hat.array().sqrt().matrix();
  ci.lower = tau_hat - half_width;
  ci.upper = tau_hat + half_width;
  return ci;
}

EffectEstimate estimate_sp(const ObservedData& data, const SplitPlotSpec& spec,
                           double alpha) {
  EffectEstimate est;
  est.method = DesignKind::SplitPlot;
  est.alpha = alpha;
  est.tau_hat = point_estimates(data);
  est.v_hat = estimate_variance_sp(data, spec);
  est.ci = confidence_interval(est.tau_hat, est.v_hat, alpha);
  return est;
}

EffectEstimate estimate_cr(const ObservedData& data, double alpha) {
  EffectEstimate est;
  est.method = DesignKind::CompletelyRandomized;
  est.alpha = alpha;
  est.tau_hat = point_estimates(data);
  est.v_hat = estimate_variance_cr(data);
  est.ci = confidence_interval(est.tau_hat, est.v_hat, alpha);
  return est;
}

}  // namespace splitplot
