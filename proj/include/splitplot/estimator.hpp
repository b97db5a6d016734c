#pragma once

#include <Eigen/Dense>

#include "splitplot/design.hpp"
#include "splitplot/normal.hpp"
#include "splitplot/pom.hpp"

namespace splitplot {

struct ObservedData {
  BlockLayout layout;
  Assignment assignment;
  Eigen::VectorXd outcomes;   // observed outcome per unit
  Eigen::Vector4d arm_means;  // average observed outcome per treatment arm
};

/// Reveals each unit's potential outcome under its assigned treatment.
ObservedData observe(const PotentialOutcomeMatrix& pom,
                     const Assignment& assignment);

ObservedData make_observed_data(const BlockLayout& layout,
                                Assignment assignment,
                                Eigen::VectorXd outcomes);

/// Plug-in contrasts of observed arm means, (A, B, AB).
Eigen::Vector3d point_estimates(const ObservedData& data);

/// Exact sampling variances of the point estimates under complete
/// randomization of the given arm sizes.
Eigen::Vector3d sampling_variance_cr(const PotentialOutcomeMatrix& pom,
                                     const CompletelyRandomizedSpec& spec);

/// Exact sampling variances under the split-plot design.
Eigen::Vector3d sampling_variance_sp(const PotentialOutcomeMatrix& pom,
                                     const SplitPlotSpec& spec);

// Closed forms under strict additivity, driven by the two scalar covariance
// summaries. The discriminant between - within/M decides, effect by effect,
// whether the split-plot design beats its completely randomized counterpart.
struct SpecialCaseReport {
  Eigen::Vector3d sp_variance;     // (A, B, AB); B and AB coincide
  double cr_variance;              // common across effects
  double discriminant;             // between - within / M
  Eigen::Vector3d sp_minus_cr;     // exact variance differences
  std::array<int, 3> predicted_sign;  // sign of sp_minus_cr per effect
};

SpecialCaseReport closed_form_special_cases(const SplitPlotSpec& spec,
                                            double between_var,
                                            double within_var);

/// Between-whole-plot sample covariances of the per-plot observed means,
/// centered at the grand arm means. Defined for treatment pairs observed in
/// the same whole-plots: the (1,2) block over control plots and the (3,4)
/// block over treated plots; the remaining entries are zero.
Eigen::Matrix4d sample_between_covariances(const ObservedData& data,
                                           const SplitPlotSpec& spec);

/// Conservative variance estimate from between-whole-plot sample covariances
/// of the per-plot observed means. Requires >= 2 whole-plots on both sides.
Eigen::Vector3d estimate_variance_sp(const ObservedData& data,
                                     const SplitPlotSpec& spec);

/// Arm-variance estimate used when the data are analyzed as completely
/// randomized: one quarter of the sum of s^2(k)/N_k. Requires arms of size >= 2.
Eigen::Vector3d estimate_variance_cr(const ObservedData& data);

struct ConfidenceIntervals {
  Eigen::Vector3d lower;
  Eigen::Vector3d upper;
  double alpha = 0.0;
};

ConfidenceIntervals confidence_interval(const Eigen::Vector3d& tau_hat,
                                        const Eigen::Vector3d& v_hat,
                                        double alpha);

struct EffectEstimate {
  Eigen::Vector3d tau_hat;
  Eigen::Vector3d v_hat;
  ConfidenceIntervals ci;
  DesignKind method = DesignKind::SplitPlot;
  double alpha = 0.0;
};

EffectEstimate estimate_sp(const ObservedData& data, const SplitPlotSpec& spec,
                           double alpha);
EffectEstimate estimate_cr(const ObservedData& data, double alpha);

}  // namespace splitplot
