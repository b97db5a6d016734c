#include "splitplot/pom.hpp"

#include <stdexcept>

#include "splitplot/matrix_utils.hpp"

namespace splitplot {

PotentialOutcomeMatrix::PotentialOutcomeMatrix(BlockLayout layout_in,
                                               Eigen::MatrixXd values_in)
    : layout(layout_in), values(std::move(values_in)) {
  if (values.rows() != layout.units() || values.cols() != kNumTreatments) {
    throw std::invalid_argument(
        "PotentialOutcomeMatrix: values must be N x 4 for the given layout");
  }
  if (!values.allFinite()) {
    throw std::invalid_argument(
        "PotentialOutcomeMatrix: entries must be finite, no missing values");
  }
}

Eigen::MatrixXd PotentialOutcomeMatrix::block_means() const {
  const int W = layout.whole_plots;
  const int M = layout.subplots_per_plot;
  Eigen::MatrixXd means(W, kNumTreatments);
  for (int w = 0; w < W; ++w) {
    means.row(w) = values.middleRows(w * M, M).colwise().mean();
  }
  return means;
}

Projections build_projections(const BlockLayout& layout) {
  const int W = layout.whole_plots;
  const int M = layout.subplots_per_plot;
  Projections p;
  p.grand = centering_projection(layout.units());
  p.within = kronecker(Eigen::MatrixXd::Identity(W, W), centering_projection(M));
  p.between = kronecker(centering_projection(W),
                        Eigen::MatrixXd::Constant(M, M, 1.0 / M));
  return p;
}

CovarianceSummary summarize_covariances(const PotentialOutcomeMatrix& pom) {
  const int W = pom.layout.whole_plots;
  const int M = pom.layout.subplots_per_plot;
  const int N = pom.layout.units();

  const Eigen::RowVector4d grand_means = pom.values.colwise().mean();
  const Eigen::MatrixXd centered = pom.values.rowwise() - grand_means;

  CovarianceSummary out;
  out.total = (centered.transpose() * centered) / (N - 1);

  const Eigen::MatrixXd block_means = pom.block_means();
  const Eigen::MatrixXd block_centered = block_means.rowwise() - grand_means;
  out.between = (block_centered.transpose() * block_centered) / (W - 1);

  out.per_block.reserve(W);
  Eigen::Matrix4d within_sum = Eigen::Matrix4d::Zero();
  for (int w = 0; w < W; ++w) {
    const Eigen::MatrixXd dev =
        pom.values.middleRows(w * M, M).rowwise() - block_means.row(w);
    Eigen::Matrix4d s = (dev.transpose() * dev) / (M - 1);
    within_sum += s;
    out.per_block.push_back(std::move(s));
  }
  out.within = within_sum / W;
  return out;
}

FactorialEffectSummary factorial_effects(const PotentialOutcomeMatrix& pom) {
  const int W = pom.layout.whole_plots;
  const int M = pom.layout.subplots_per_plot;
  const int N = pom.layout.units();

  FactorialEffectSummary out;
  out.tau_unit = 0.5 * pom.values * contrast_columns();
  out.mu_unit = pom.values.rowwise().mean();

  out.tau_block.resize(W, kNumEffects);
  Eigen::VectorXd mu_block(W);
  for (int w = 0; w < W; ++w) {
    out.tau_block.row(w) = out.tau_unit.middleRows(w * M, M).colwise().mean();
    mu_block(w) = out.mu_unit.segment(w * M, M).mean();
  }
  out.tau = out.tau_unit.colwise().mean().transpose();
  const double mu = out.mu_unit.mean();

  for (int f = 0; f < kNumEffects; ++f) {
    out.effect_variance(f) =
        (out.tau_unit.col(f).array() - out.tau(f)).square().sum() / (N - 1);
    out.effect_variance_between(f) =
        (out.tau_block.col(f).array() - out.tau(f)).square().sum() / (W - 1);
    double within = 0.0;
    for (int w = 0; w < W; ++w) {
      within += (out.tau_unit.col(f).segment(w * M, M).array() -
                 out.tau_block(w, f))
                    .square()
                    .sum() /
                (M - 1);
    }
    out.effect_variance_within(f) = within / W;
  }

  out.mu_variance_between = (mu_block.array() - mu).square().sum() / (W - 1);
  double mu_within = 0.0;
  for (int w = 0; w < W; ++w) {
    mu_within +=
        (out.mu_unit.segment(w * M, M).array() - mu_block(w)).square().sum() /
        (M - 1);
  }
  out.mu_variance_within = mu_within / W;
  return out;
}

AdditivityReport classify_additivity(const PotentialOutcomeMatrix& pom,
                                     double tolerance) {
  if (tolerance < 0.0) {
    throw std::invalid_argument("classify_additivity: tolerance must be >= 0");
  }
  const FactorialEffectSummary eff = factorial_effects(pom);

  AdditivityReport report;
  report.tolerance = tolerance;
  report.strict = eff.effect_variance.maxCoeff() <= tolerance;
  report.between_block = eff.effect_variance_between.maxCoeff() <= tolerance;
  report.within_block = eff.effect_variance_within.maxCoeff() <= tolerance;

  report.constants.setZero();
  if (report.strict || report.between_block) {
    const Eigen::Vector4d means = pom.column_means();
    for (int k = 0; k < kNumTreatments; ++k) {
      for (int l = 0; l < kNumTreatments; ++l) {
        report.constants(k, l) = means(l) - means(k);
      }
    }
  }
  if (report.within_block) {
    const Eigen::MatrixXd block_means = pom.block_means();
    report.block_constants.resize(pom.layout.whole_plots);
    for (int w = 0; w < pom.layout.whole_plots; ++w) {
      for (int k = 0; k < kNumTreatments; ++k) {
        for (int l = 0; l < kNumTreatments; ++l) {
          report.block_constants[w](k, l) =
              block_means(w, l) - block_means(w, k);
        }
      }
    }
  }
  return report;
}

}  // namespace splitplot
