#pragma once

#include <Eigen/Dense>
#include <vector>

#include "splitplot/layout.hpp"

namespace splitplot {

// The science table: one row per unit in lexicographic (w, m) order, one
// column per treatment 1..4. Fixed once constructed; randomization is the
// only stochastic element downstream.
struct PotentialOutcomeMatrix {
  BlockLayout layout;
  Eigen::MatrixXd values;  // N x 4

  PotentialOutcomeMatrix(BlockLayout layout_in, Eigen::MatrixXd values_in);

  double value(int w, int m, int treatment) const {
    return values(layout.unit_index(w, m), treatment - 1);
  }

  Eigen::Vector4d unit_row(int i) const { return values.row(i).transpose(); }

  Eigen::VectorXd column(int treatment) const {
    return values.col(treatment - 1);
  }

  Eigen::Vector4d column_means() const {
    return values.colwise().mean().transpose();
  }

  /// Within-block averages, W x 4.
  Eigen::MatrixXd block_means() const;
};

struct Projections {
  Eigen::MatrixXd grand;    // I_N - J_N / N
  Eigen::MatrixXd within;   // I_W (x) P_M
  Eigen::MatrixXd between;  // P_W (x) J_M / M
};

Projections build_projections(const BlockLayout& layout);

// Finite-population covariance matrices of the four potential-outcome
// columns. Denominators are N-1, (W-1)M, and W(M-1); the total matrix is the
// exact linear combination of the between and within parts.
struct CovarianceSummary {
  Eigen::Matrix4d total;                   // S2
  Eigen::Matrix4d between;                 // S2_btw
  Eigen::Matrix4d within;                  // S2_in
  std::vector<Eigen::Matrix4d> per_block;  // S2_w, one per whole-plot
};

CovarianceSummary summarize_covariances(const PotentialOutcomeMatrix& pom);

struct FactorialEffectSummary {
  Eigen::Vector3d tau;          // population effects (A, B, AB)
  Eigen::MatrixXd tau_block;    // W x 3 block average effects
  Eigen::MatrixXd tau_unit;     // N x 3 unit-level effects
  Eigen::Vector3d effect_variance;          // S2_F
  Eigen::Vector3d effect_variance_between;  // S2_F-btw
  Eigen::Vector3d effect_variance_within;   // S2_F-in
  Eigen::VectorXd mu_unit;      // per-unit mean across the four treatments
  double mu_variance_between;
  double mu_variance_within;
};

FactorialEffectSummary factorial_effects(const PotentialOutcomeMatrix& pom);

// Additivity classification on variance statistics with an absolute
// tolerance. strict: all unit-level effects constant; between_block: block
// average effects constant across blocks; within_block: unit-level effects
// constant within every block.
struct AdditivityReport {
  bool strict = false;
  bool between_block = false;
  bool within_block = false;
  double tolerance = 0.0;
  Eigen::Matrix4d constants;  // C(k,l), meaningful when strict or between_block
  std::vector<Eigen::Matrix4d> block_constants;  // C_w(k,l), when within_block
};

AdditivityReport classify_additivity(const PotentialOutcomeMatrix& pom,
                                     double tolerance = 1e-9);

}  // namespace splitplot
