#include <doctest.h>

#include "splitplot/matrix_utils.hpp"
#include "splitplot/pom.hpp"
#include "splitplot/rng.hpp"
#include "test_helpers.hpp"

using namespace splitplot;
using splitplot::testing::between_block_additive_pom;
using splitplot::testing::random_pom;
using splitplot::testing::strictly_additive_pom;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("between projection for the 2x2 layout") {
  const Projections p = build_projections(BlockLayout(2, 2));
  Eigen::MatrixXd expected(4, 4);
  expected << 1, 1, -1, -1,
              1, 1, -1, -1,
              -1, -1, 1, 1,
              -1, -1, 1, 1;
  expected *= 0.25;
  CHECK(max_abs(p.between - expected) < 1e-15);
}

TEST_CASE("projections split the grand centering and are orthogonal") {
  const Projections p = build_projections(BlockLayout(3, 2));
  CHECK(max_abs(p.within + p.between - p.grand) < 1e-15);
  CHECK(max_abs(p.within * p.between) < 1e-15);
}

TEST_CASE("projection algebra holds on every layout up to 12 x 12") {
  for (int W = 2; W <= 12; ++W) {
    for (int M = 2; M <= 12; ++M) {
      const Projections p = build_projections(BlockLayout(W, M));
      CAPTURE(W);
      CAPTURE(M);
      REQUIRE(max_abs(p.grand - p.grand.transpose()) < 1e-13);
      REQUIRE(max_abs(p.within - p.within.transpose()) < 1e-13);
      REQUIRE(max_abs(p.between - p.between.transpose()) < 1e-13);
      REQUIRE(max_abs(p.grand * p.grand - p.grand) < 1e-13);
      REQUIRE(max_abs(p.within * p.within - p.within) < 1e-13);
      REQUIRE(max_abs(p.between * p.between - p.between) < 1e-13);
      REQUIRE(max_abs(p.within + p.between - p.grand) < 1e-13);
      REQUIRE(max_abs(p.within * p.between) < 1e-13);
    }
  }
}

TEST_CASE("constant science table has zero covariances") {
  const BlockLayout layout(3, 3);
  const PotentialOutcomeMatrix pom(
      layout, Eigen::MatrixXd::Constant(layout.units(), 4, 2.5));
  const CovarianceSummary cov = summarize_covariances(pom);
  CHECK(max_abs(cov.total) < 1e-14);
  CHECK(max_abs(cov.between) < 1e-14);
  CHECK(max_abs(cov.within) < 1e-14);
}

TEST_CASE("hand-worked covariance summary on the 2x2 layout") {
  const BlockLayout layout(2, 2);
  Eigen::MatrixXd values(4, 4);
  for (int i = 0; i < 4; ++i) values.row(i).setConstant(i);
  const PotentialOutcomeMatrix pom(layout, values);
  const CovarianceSummary cov = summarize_covariances(pom);
  CHECK(max_abs(cov.between - Eigen::Matrix4d::Constant(2.0)) < 1e-14);
  CHECK(max_abs(cov.within - Eigen::Matrix4d::Constant(0.5)) < 1e-14);
  CHECK(max_abs(cov.total - Eigen::Matrix4d::Constant(5.0 / 3.0)) < 1e-14);
  // Linear decomposition of the total: (1*2*2 + 2*1*0.5) / 3 = 5/3.
  CHECK(max_abs((1.0 * 2.0 * cov.between + 2.0 * 1.0 * cov.within) / 3.0 -
                cov.total) < 1e-14);
}

TEST_CASE("covariance decomposition holds for random tables") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (auto [W, M] : {std::pair{2, 5}, {5, 2}, {4, 4}, {7, 3}}) {
      const PotentialOutcomeMatrix pom = random_pom(BlockLayout(W, M), seed);
      const CovarianceSummary cov = summarize_covariances(pom);
      const int N = W * M;
      const Eigen::Matrix4d combined =
          ((W - 1.0) * M * cov.between + W * (M - 1.0) * cov.within) /
          (N - 1.0);
      REQUIRE(max_abs(combined - cov.total) /
                  std::max(1.0, max_abs(cov.total)) <
              1e-12);
    }
  }
}

TEST_CASE("covariances agree with the projection quadratic forms") {
  const BlockLayout layout(4, 3);
  const PotentialOutcomeMatrix pom = random_pom(layout, 99);
  const Projections p = build_projections(layout);
  const CovarianceSummary cov = summarize_covariances(pom);
  const int W = layout.whole_plots, M = layout.subplots_per_plot;
  const int N = layout.units();
  CHECK(max_abs(pom.values.transpose() * p.grand * pom.values / (N - 1.0) -
                cov.total) < 1e-12);
  CHECK(max_abs(pom.values.transpose() * p.between * pom.values /
                    ((W - 1.0) * M) -
                cov.between) < 1e-12);
  CHECK(max_abs(pom.values.transpose() * p.within * pom.values /
                    (W * (M - 1.0)) -
                cov.within) < 1e-12);
}

TEST_CASE("factorial effects of simple tables") {
  const BlockLayout layout(2, 2);

  const PotentialOutcomeMatrix zeros(layout, Eigen::MatrixXd::Zero(4, 4));
  const FactorialEffectSummary zero_eff = factorial_effects(zeros);
  CHECK(max_abs(zero_eff.tau) < 1e-15);
  CHECK(max_abs(zero_eff.effect_variance) < 1e-15);

  Eigen::MatrixXd values(4, 4);
  for (int i = 0; i < 4; ++i) values.row(i) << 1, 2, 3, 4;
  const FactorialEffectSummary eff =
      factorial_effects(PotentialOutcomeMatrix(layout, values));
  CHECK(eff.tau(0) == doctest::Approx(2.0));
  CHECK(eff.tau(1) == doctest::Approx(1.0));
  CHECK(eff.tau(2) == doctest::Approx(0.0));
  CHECK(max_abs(eff.effect_variance) < 1e-15);
}

TEST_CASE("strictly additive tables have zero effect variances") {
  const PotentialOutcomeMatrix pom =
      strictly_additive_pom(BlockLayout(4, 3), 5);
  const FactorialEffectSummary eff = factorial_effects(pom);
  CHECK(max_abs(eff.effect_variance) < 1e-24);
  // All sixteen covariance entries coincide for strictly additive tables.
  const CovarianceSummary cov = summarize_covariances(pom);
  CHECK(max_abs(cov.total - Eigen::Matrix4d::Constant(cov.total(0, 0))) <
        1e-12);
}

TEST_CASE("effect aggregates are consistent across levels") {
  const PotentialOutcomeMatrix pom = random_pom(BlockLayout(5, 4), 17);
  const FactorialEffectSummary eff = factorial_effects(pom);
  CHECK(max_abs(eff.tau_block.colwise().mean().transpose() - eff.tau) < 1e-13);
  CHECK(max_abs(eff.tau_unit.colwise().mean().transpose() - eff.tau) < 1e-13);
  CHECK((eff.effect_variance.array() >= 0.0).all());
  CHECK((eff.effect_variance_between.array() >= 0.0).all());
  CHECK((eff.effect_variance_within.array() >= 0.0).all());
}

TEST_CASE("classification: identical columns are additive at every level") {
  const BlockLayout layout(3, 2);
  SeedStream rng(8);
  Eigen::VectorXd base(layout.units());
  for (int i = 0; i < base.size(); ++i) base(i) = rng.normal();
  Eigen::MatrixXd values(layout.units(), 4);
  for (int k = 0; k < 4; ++k) values.col(k) = base;
  const AdditivityReport report =
      classify_additivity(PotentialOutcomeMatrix(layout, values));
  CHECK(report.strict);
  CHECK(report.between_block);
  CHECK(report.within_block);
  CHECK(max_abs(report.constants) < 1e-12);
}

TEST_CASE("classification: block-mean matched noise is between-block only") {
  const PotentialOutcomeMatrix pom =
      between_block_additive_pom(BlockLayout(4, 3), 21);
  const AdditivityReport report = classify_additivity(pom);
  CHECK(report.between_block);
  CHECK_FALSE(report.within_block);
  CHECK_FALSE(report.strict);
}

TEST_CASE("classification: a perturbation well above tolerance breaks strictness") {
  const BlockLayout layout(2, 2);
  PotentialOutcomeMatrix pom = strictly_additive_pom(layout, 12);
  const double tolerance = 0.5;
  CHECK(classify_additivity(pom, tolerance).strict);
  pom.values(0, 0) += 10.0 * tolerance;
  CHECK_FALSE(classify_additivity(pom, tolerance).strict);
}

TEST_CASE("strict equals between and within on generated classes") {
  const BlockLayout layout(5, 4);
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    for (int kind = 0; kind < 3; ++kind) {
      const PotentialOutcomeMatrix pom =
          kind == 0   ? strictly_additive_pom(layout, seed)
          : kind == 1 ? between_block_additive_pom(layout, seed)
                      : random_pom(layout, seed);
      const AdditivityReport report = classify_additivity(pom);
      CAPTURE(kind);
      REQUIRE(report.strict == (report.between_block && report.within_block));
    }
  }
}

TEST_CASE("rank-one Hadamard identity on random matrices") {
  SeedStream rng(77);
  const int L = 6;
  Eigen::VectorXd a(L), b(L);
  Eigen::MatrixXd q(L, L);
  for (int i = 0; i < L; ++i) {
    a(i) = rng.normal();
    b(i) = rng.normal();
    for (int j = 0; j < L; ++j) q(i, j) = rng.normal();
  }
  const Eigen::MatrixXd lhs = (a * b.transpose()).cwiseProduct(q);
  const Eigen::MatrixXd rhs =
      a.asDiagonal() * q * b.asDiagonal();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("block-diagonal quadratic form reduces to a Hadamard product") {
  SeedStream rng(78);
  const int N = 5, K = 4;
  Eigen::MatrixXd x(N, K), a(K, K), bmat(N, N);
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < K; ++k) x(i, k) = rng.normal();
    for (int j = 0; j < N; ++j) bmat(i, j) = rng.normal();
  }
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) a(i, j) = rng.normal();
  }
  Eigen::MatrixXd xtilde = Eigen::MatrixXd::Zero(N * K, K);
  for (int k = 0; k < K; ++k) xtilde.block(k * N, k, N, 1) = x.col(k);
  const Eigen::MatrixXd lhs =
      xtilde.transpose() * kronecker(a, bmat) * xtilde;
  const Eigen::MatrixXd rhs = a.cwiseProduct(x.transpose() * bmat * x);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("construction rejects bad shapes and non-finite entries") {
  const BlockLayout layout(2, 2);
  CHECK_THROWS(PotentialOutcomeMatrix(layout, Eigen::MatrixXd::Zero(3, 4)));
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(4, 4);
  values(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(PotentialOutcomeMatrix(layout, values));
  CHECK_THROWS(BlockLayout(1, 5));
  CHECK_THROWS(BlockLayout(5, 1));
}
