#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "splitplot/design.hpp"
#include "splitplot/estimator.hpp"
#include "splitplot/pom.hpp"

namespace splitplot {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

std::uint64_t count_assignments(const SplitPlotSpec& spec);
std::uint64_t count_assignments(const CompletelyRandomizedSpec& spec);

// Visits every valid assignment exactly once, in a fixed colexicographic
// order of the underlying index subsets. Throws when the support exceeds cap.
void enumerate_assignments(const SplitPlotSpec& spec,
                           const std::function<void(const Assignment&)>& visit,
                           std::uint64_t cap = kDefaultEnumerationCap);
void enumerate_assignments(const CompletelyRandomizedSpec& spec,
                           const std::function<void(const Assignment&)>& visit,
                           std::uint64_t cap = kDefaultEnumerationCap);

// Deviations of the unit-level parameters from their finite-population
// averages, plus the expectations of the two factor-level indicators.
struct ResidualProfile {
  Eigen::VectorXd mean_deviation;    // per-unit mean minus population mean
  Eigen::MatrixXd effect_deviation;  // N x 3, unit effect minus population effect
  double mean_level_a = 0.0;         // (r_A - 1) / (r_A + 1)
  double mean_level_b = 0.0;         // (r_B - 1) / (r_B + 1)
};

ResidualProfile residual_profile(const PotentialOutcomeMatrix& pom,
                                 const SplitPlotSpec& spec);

/// Observed outcome minus the population mean of the assigned treatment.
Eigen::VectorXd residuals(const PotentialOutcomeMatrix& pom,
                          const Assignment& assignment);

/// The same residuals rebuilt from the deviation profile; agrees with
/// residuals() for every assignment.
Eigen::VectorXd residuals_from_profile(const ResidualProfile& profile,
                                       const Assignment& assignment);

enum class ResidualCovMode { Enumerated, FiniteFormula, Asymptotic };

// N x N covariance matrix of the residuals over the split-plot randomization.
// Enumerated averages over the full support; FiniteFormula evaluates the
// exact finite-(W, M) closed forms; Asymptotic fills same-plot pairs with the
// large-(W, M) limit and cross-plot pairs with zero.
Eigen::MatrixXd residual_covariance(const PotentialOutcomeMatrix& pom,
                                    const SplitPlotSpec& spec,
                                    ResidualCovMode mode,
                                    std::uint64_t cap = kDefaultEnumerationCap);

struct ExactMomentsOptions {
  bool cov_zstar = true;
  bool residual_cov = true;
  bool variance_estimate = true;
  std::uint64_t cap = kDefaultEnumerationCap;
};

struct EnumerationReport {
  std::uint64_t assignment_count = 0;
  Eigen::Vector3d mean_tau_hat = Eigen::Vector3d::Zero();
  Eigen::Vector3d var_tau_hat = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_v_hat = Eigen::Vector3d::Zero();
  bool has_variance_estimate = false;
  Eigen::MatrixXd cov_zstar;     // 4N x 4N, empty when skipped
  Eigen::MatrixXd residual_cov;  // N x N, empty when skipped
};

/// Exact averages of the estimator and assignment-vector functionals over
/// the uniform distribution on the design's support.
EnumerationReport exact_moments(const PotentialOutcomeMatrix& pom,
                                const SplitPlotSpec& spec,
                                const ExactMomentsOptions& options = {});
EnumerationReport exact_moments(const PotentialOutcomeMatrix& pom,
                                const CompletelyRandomizedSpec& spec,
                                const ExactMomentsOptions& options = {});

/// Covariance of the +1 whole-plot indicator over the C(W, W_plus) stage-one
/// draws, and its closed form W_plus W_minus / (W (W-1)) * P_W.
Eigen::MatrixXd enumerated_wholeplot_cov(const SplitPlotSpec& spec);
Eigen::MatrixXd wholeplot_cov_formula(const SplitPlotSpec& spec);

/// E[Z(l) Z(k)^T] over the split-plot randomization: entry (i, j) is the
/// probability that unit i lands in arm l and unit j in arm k.
Eigen::MatrixXd enumerated_indicator_second_moment(
    const SplitPlotSpec& spec, int k, int l,
    std::uint64_t cap = kDefaultEnumerationCap);
/// Closed form of the same moment for treatments sharing a level of factor A.
Eigen::MatrixXd indicator_second_moment_formula(const SplitPlotSpec& spec,
                                                int k, int l);

/// Enumerated mean of the between-whole-plot sample covariances, and its
/// closed-form expectation (defined on the (1,2) and (3,4) blocks).
Eigen::Matrix4d enumerated_between_sample_cov_mean(
    const PotentialOutcomeMatrix& pom, const SplitPlotSpec& spec,
    std::uint64_t cap = kDefaultEnumerationCap);
Eigen::Matrix4d expected_between_sample_cov(const PotentialOutcomeMatrix& pom,
                                            const SplitPlotSpec& spec);

}  // namespace splitplot
