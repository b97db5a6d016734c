#include "splitplot/oracle.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "splitplot/matrix_utils.hpp"

namespace splitplot {

namespace {

// Kahan-Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    // n - k + i <= 2^32 in practice; intermediate fits after division
    result = saturating_mul(result, static_cast<std::uint64_t>(n - k + i));
    if (result == UINT64_MAX) return UINT64_MAX;
    result /= i;
  }
  return result;
}

// Advances a sorted k-subset of {0, .., n-1} in colexicographic order.
bool next_subset_colex(std::vector<int>& s, int n) {
  const int k = static_cast<int>(s.size());
  for (int i = 0; i < k; ++i) {
    const int limit = (i + 1 < k) ? s[i + 1] : n;
    if (s[i] + 1 < limit) {
      ++s[i];
      for (int j = 0; j < i; ++j) s[j] = j;
      return true;
    }
  }
  return false;
}

std::vector<int> first_subset(int k) {
  std::vector<int> s(k);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

void require_within_cap(std::uint64_t count, std::uint64_t cap) {
  if (count > cap) {
    throw std::length_error("enumeration support exceeds the configured cap");
  }
}

}  // namespace

std::uint64_t count_assignments(const SplitPlotSpec& spec) {
  std::uint64_t count =
      binomial(spec.layout.whole_plots, spec.plots_treated);
  const std::uint64_t per_plot =
      binomial(spec.layout.subplots_per_plot, spec.subplots_treated);
  for (int w = 0; w < spec.layout.whole_plots; ++w) {
    count = saturating_mul(count, per_plot);
  }
  return count;
}

std::uint64_t count_assignments(const CompletelyRandomizedSpec& spec) {
  std::uint64_t count = 1;
  int remaining = spec.units;
  for (int k = 0; k < kNumTreatments; ++k) {
    count = saturating_mul(count, binomial(remaining, spec.arm_sizes[k]));
    remaining -= spec.arm_sizes[k];
  }
  return count;
}

void enumerate_assignments(const SplitPlotSpec& spec,
                           const std::function<void(const Assignment&)>& visit,
                           std::uint64_t cap) {
  require_within_cap(count_assignments(spec), cap);
  const int W = spec.layout.whole_plots;
  const int M = spec.layout.subplots_per_plot;

  Assignment asg;
  asg.units = spec.layout.units();
  asg.treatment.assign(asg.units, 0);
  asg.layout = spec.layout;

  std::vector<int> plot_subset = first_subset(spec.plots_treated);
  do {
    std::vector<int> a_level(W, -1);
    for (int idx : plot_subset) a_level[idx] = +1;

    std::vector<std::vector<int>> sub(W, first_subset(spec.subplots_treated));
    for (;;) {
      for (int w = 0; w < W; ++w) {
        for (int m = 0; m < M; ++m) {
          asg.treatment[spec.layout.unit_index(w, m)] =
              treatment_for_levels(a_level[w], -1);
        }
        for (int m : sub[w]) {
          asg.treatment[spec.layout.unit_index(w, m)] =
              treatment_for_levels(a_level[w], +1);
        }
      }
      visit(asg);

      int w0 = 0;
      while (w0 < W && !next_subset_colex(sub[w0], M)) {
        sub[w0] = first_subset(spec.subplots_treated);
        ++w0;
      }
      if (w0 == W) break;
    }
  } while (next_subset_colex(plot_subset, W));
}

void enumerate_assignments(const CompletelyRandomizedSpec& spec,
                           const std::function<void(const Assignment&)>& visit,
                           std::uint64_t cap) {
  if (spec.units > 12) {
    throw std::length_error(
        "completely randomized enumeration is limited to N <= 12");
  }
  require_within_cap(count_assignments(spec), cap);

  Assignment asg;
  asg.units = spec.units;
  asg.treatment.assign(spec.units, 0);

  // Choose arm 1 from all units, arm 2 from the rest, then arm 3; the
  // remaining units form arm 4. Each stage runs in colex order.
  std::vector<int> all(spec.units);
  std::iota(all.begin(), all.end(), 0);

  auto remaining_after = [](const std::vector<int>& pool,
                            const std::vector<int>& picked_pos) {
    std::vector<bool> taken(pool.size(), false);
    for (int p : picked_pos) taken[p] = true;
    std::vector<int> rest;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!taken[i]) rest.push_back(pool[i]);
    }
    return rest;
  };

  std::vector<int> s1 = first_subset(spec.arm_sizes[0]);
  do {
    for (int p : s1) asg.treatment[all[p]] = 1;
    const std::vector<int> pool2 = remaining_after(all, s1);
    std::vector<int> s2 = first_subset(spec.arm_sizes[1]);
    do {
      for (int p : s2) asg.treatment[pool2[p]] = 2;
      const std::vector<int> pool3 = remaining_after(pool2, s2);
      std::vector<int> s3 = first_subset(spec.arm_sizes[2]);
      do {
        for (int p : s3) asg.treatment[pool3[p]] = 3;
        for (int u : remaining_after(pool3, s3)) asg.treatment[u] = 4;
        visit(asg);
      } while (next_subset_colex(s3, static_cast<int>(pool3.size())));
    } while (next_subset_colex(s2, static_cast<int>(pool2.size())));
  } while (next_subset_colex(s1, spec.units));
}

ResidualProfile residual_profile(const PotentialOutcomeMatrix& pom,
                                 const SplitPlotSpec& spec) {
  const FactorialEffectSummary eff = factorial_effects(pom);
  ResidualProfile profile;
  profile.mean_deviation = eff.mu_unit.array() - eff.mu_unit.mean();
  profile.effect_deviation = eff.tau_unit.rowwise() - eff.tau.transpose();
  profile.mean_level_a = (spec.ratio_a() - 1.0) / (spec.ratio_a() + 1.0);
  profile.mean_level_b = (spec.ratio_b() - 1.0) / (spec.ratio_b() + 1.0);
  return profile;
}

Eigen::VectorXd residuals(const PotentialOutcomeMatrix& pom,
                          const Assignment& assignment) {
  if (assignment.units != pom.layout.units()) {
    throw std::invalid_argument("residuals: assignment size differs from POM");
  }
  const Eigen::Vector4d means = pom.column_means();
  Eigen::VectorXd eps(assignment.units);
  for (int i = 0; i < assignment.units; ++i) {
    const int k = assignment.treatment[i];
    eps(i) = pom.values(i, k - 1) - means(k - 1);
  }
  return eps;
}

Eigen::VectorXd residuals_from_profile(const ResidualProfile& profile,
                                       const Assignment& assignment) {
  const int n = assignment.units;
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) {
    const int k = assignment.treatment[i];
    eps(i) = profile.mean_deviation(i) +
             0.5 * (level_a(k) * profile.effect_deviation(i, 0) +
                    level_b(k) * profile.effect_deviation(i, 1) +
                    level_ab(k) * profile.effect_deviation(i, 2));
  }
  return eps;
}

namespace {

Eigen::MatrixXd residual_cov_closed_form(const PotentialOutcomeMatrix& pom,
                                         const SplitPlotSpec& spec,
                                         bool asymptotic) {
  const ResidualProfile profile = residual_profile(pom, spec);
  const int N = pom.layout.units();
  const int M = pom.layout.subplots_per_plot;
  const int W = pom.layout.whole_plots;
  const double ra = spec.ratio_a();
  const double rb = spec.ratio_b();
  const double ea = profile.mean_level_a;
  const double eb = profile.mean_level_b;
  const double a_scale = ra / ((1.0 + ra) * (1.0 + ra));
  const double b_scale = rb / ((1.0 + rb) * (1.0 + rb));

  // Per-unit factor combining the A and AB deviations.
  Eigen::VectorXd fa(N);
  for (int i = 0; i < N; ++i) {
    fa(i) = profile.effect_deviation(i, 0) + eb * profile.effect_deviation(i, 2);
  }
  auto b_quadratic = [&](int i, int j) {
    const double bi = profile.effect_deviation(i, 1);
    const double bj = profile.effect_deviation(j, 1);
    const double abi = profile.effect_deviation(i, 2);
    const double abj = profile.effect_deviation(j, 2);
    return bi * bj + ea * (bi * abj + abi * bj) + abi * abj;
  };

  Eigen::MatrixXd cov(N, N);
  for (int i = 0; i < N; ++i) {
    const int wi = i / M;
    for (int j = 0; j < N; ++j) {
      const int wj = j / M;
      double value = 0.0;
      if (wi == wj) {
        value = a_scale * fa(i) * fa(j);
        if (!asymptotic) {
          if (i == j) {
            value += b_scale * b_quadratic(i, i);
          } else {
            value -= b_scale / (M - 1.0) * b_quadratic(i, j);
          }
        }
      } else if (!asymptotic) {
        value = -a_scale / (W - 1.0) * fa(i) * fa(j);
      }
      cov(i, j) = value;
    }
  }
  return cov;
}

Eigen::MatrixXd residual_cov_enumerated(const PotentialOutcomeMatrix& pom,
                                        const SplitPlotSpec& spec,
                                        std::uint64_t cap) {
  const int N = pom.layout.units();
  std::vector<CompensatedSum> sum(N);
  std::vector<CompensatedSum> pair(static_cast<std::size_t>(N) * N);
  std::uint64_t count = 0;
  enumerate_assignments(
      spec,
      [&](const Assignment& asg) {
        const Eigen::VectorXd eps = residuals(pom, asg);
        for (int i = 0; i < N; ++i) {
          sum[i].add(eps(i));
          for (int j = 0; j < N; ++j) {
            pair[static_cast<std::size_t>(i) * N + j].add(eps(i) * eps(j));
          }
        }
        ++count;
      },
      cap);

  Eigen::MatrixXd cov(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const double mi = sum[i].value() / count;
      const double mj = sum[j].value() / count;
      cov(i, j) = pair[static_cast<std::size_t>(i) * N + j].value() / count -
                  mi * mj;
    }
  }
  return cov;
}

}  // namespace

Eigen::MatrixXd residual_covariance(const PotentialOutcomeMatrix& pom,
                                    const SplitPlotSpec& spec,
                                    ResidualCovMode mode, std::uint64_t cap) {
  if (!(spec.layout == pom.layout)) {
    throw std::invalid_argument("residual_covariance: layout mismatch");
  }
  switch (mode) {
    case ResidualCovMode::Enumerated:
      return residual_cov_enumerated(pom, spec, cap);
    case ResidualCovMode::FiniteFormula:
      return residual_cov_closed_form(pom, spec, /*asymptotic=*/false);
    case ResidualCovMode::Asymptotic:
      return residual_cov_closed_form(pom, spec, /*asymptotic=*/true);
  }
  throw std::logic_error("residual_covariance: unknown mode");
}

namespace {

struct MomentAccumulators {
  explicit MomentAccumulators(int n, const ExactMomentsOptions& options)
      : units(n), opts(options) {
    if (opts.cov_zstar) {
      pair_counts.assign(static_cast<std::size_t>(4) * n * 4 * n, 0);
    }
    if (opts.residual_cov) {
      eps_sum.resize(n);
      eps_pair.resize(static_cast<std::size_t>(n) * n);
    }
  }

  void consume(const PotentialOutcomeMatrix& pom, const Assignment& asg,
               const Eigen::Vector3d& tau_true,
               const std::function<Eigen::Vector3d(const ObservedData&)>&
                   variance_estimator) {
    const ObservedData data = observe(pom, asg);
    const Eigen::Vector3d centered = point_estimates(data) - tau_true;
    for (int f = 0; f < kNumEffects; ++f) {
      tau_dev[f].add(centered(f));
      tau_dev_sq[f].add(centered(f) * centered(f));
    }
    if (variance_estimator) {
      const Eigen::Vector3d v = variance_estimator(data);
      for (int f = 0; f < kNumEffects; ++f) v_hat[f].add(v(f));
    }
    if (opts.cov_zstar) {
      const int n = units;
      for (int i = 0; i < n; ++i) {
        const std::size_t row =
            static_cast<std::size_t>(asg.treatment[i] - 1) * n + i;
        std::uint64_t* base = pair_counts.data() + row * 4 * n;
        for (int j = 0; j < n; ++j) {
          base[static_cast<std::size_t>(asg.treatment[j] - 1) * n + j] += 1;
        }
      }
    }
    if (opts.residual_cov) {
      const Eigen::VectorXd eps = residuals(pom, asg);
      for (int i = 0; i < units; ++i) {
        eps_sum[i].add(eps(i));
        for (int j = 0; j < units; ++j) {
          eps_pair[static_cast<std::size_t>(i) * units + j].add(eps(i) *
                                                                eps(j));
        }
      }
    }
    ++count;
  }

  EnumerationReport finish(const Eigen::Vector3d& tau_true,
                           const std::array<int, 4>& arm_sizes,
                           bool variance_estimated) {
    EnumerationReport report;
    report.assignment_count = count;
    for (int f = 0; f < kNumEffects; ++f) {
      const double mean_dev = tau_dev[f].value() / count;
      report.mean_tau_hat(f) = tau_true(f) + mean_dev;
      report.var_tau_hat(f) =
          tau_dev_sq[f].value() / count - mean_dev * mean_dev;
      if (variance_estimated) {
        report.mean_v_hat(f) = v_hat[f].value() / count;
      }
    }
    report.has_variance_estimate = variance_estimated;

    if (opts.cov_zstar) {
      const int n = units;
      report.cov_zstar.resize(4 * n, 4 * n);
      for (int k = 0; k < kNumTreatments; ++k) {
        for (int i = 0; i < n; ++i) {
          const std::size_t a = static_cast<std::size_t>(k) * n + i;
          for (int l = 0; l < kNumTreatments; ++l) {
            for (int j = 0; j < n; ++j) {
              const std::size_t b = static_cast<std::size_t>(l) * n + j;
              const double second =
                  static_cast<double>(pair_counts[a * 4 * n + b]) /
                  (static_cast<double>(count) *
                   static_cast<double>(arm_sizes[k]) *
                   static_cast<double>(arm_sizes[l]));
              report.cov_zstar(static_cast<Eigen::Index>(a),
                               static_cast<Eigen::Index>(b)) =
                  second - 1.0 / (static_cast<double>(units) * units);
            }
          }
        }
      }
    }
    if (opts.residual_cov) {
      report.residual_cov.resize(units, units);
      for (int i = 0; i < units; ++i) {
        for (int j = 0; j < units; ++j) {
          const double mi = eps_sum[i].value() / count;
          const double mj = eps_sum[j].value() / count;
          report.residual_cov(i, j) =
              eps_pair[static_cast<std::size_t>(i) * units + j].value() /
                  count -
              mi * mj;
        }
      }
    }
    return report;
  }

  int units;
  ExactMomentsOptions opts;
  std::uint64_t count = 0;
  CompensatedSum tau_dev[3];
  CompensatedSum tau_dev_sq[3];
  CompensatedSum v_hat[3];
  std::vector<std::uint64_t> pair_counts;
  std::vector<CompensatedSum> eps_sum;
  std::vector<CompensatedSum> eps_pair;
};

}  // namespace

EnumerationReport exact_moments(const PotentialOutcomeMatrix& pom,
                                const SplitPlotSpec& spec,
                                const ExactMomentsOptions& options) {
  if (!(spec.layout == pom.layout)) {
    throw std::invalid_argument("exact_moments: layout mismatch");
  }
  const Eigen::Vector3d tau_true = factorial_effects(pom).tau;
  const bool with_v = options.variance_estimate && spec.variance_estimable();
  MomentAccumulators acc(pom.layout.units(), options);
  std::function<Eigen::Vector3d(const ObservedData&)> estimator;
  if (with_v) {
    estimator = [&spec](const ObservedData& data) {
      return estimate_variance_sp(data, spec);
    };
  }
  enumerate_assignments(
      spec,
      [&](const Assignment& asg) { acc.consume(pom, asg, tau_true, estimator); },
      options.cap);
  return acc.finish(tau_true, spec.arm_sizes(), with_v);
}

EnumerationReport exact_moments(const PotentialOutcomeMatrix& pom,
                                const CompletelyRandomizedSpec& spec,
                                const ExactMomentsOptions& options) {
  if (spec.units != pom.layout.units()) {
    throw std::invalid_argument("exact_moments: size mismatch");
  }
  const Eigen::Vector3d tau_true = factorial_effects(pom).tau;
  bool with_v = options.variance_estimate;
  for (int n : spec.arm_sizes) {
    if (n < 2) with_v = false;
  }
  MomentAccumulators acc(pom.layout.units(), options);
  std::function<Eigen::Vector3d(const ObservedData&)> estimator;
  if (with_v) {
    estimator = [](const ObservedData& data) {
      return estimate_variance_cr(data);
    };
  }
  enumerate_assignments(
      spec,
      [&](const Assignment& asg) { acc.consume(pom, asg, tau_true, estimator); },
      options.cap);
  return acc.finish(tau_true, spec.arm_sizes, with_v);
}

Eigen::MatrixXd enumerated_wholeplot_cov(const SplitPlotSpec& spec) {
  const int W = spec.layout.whole_plots;
  std::vector<std::uint64_t> single(W, 0);
  std::vector<std::uint64_t> pair(static_cast<std::size_t>(W) * W, 0);
  std::uint64_t count = 0;

  std::vector<int> subset = first_subset(spec.plots_treated);
  do {
    for (int a : subset) {
      single[a] += 1;
      for (int b : subset) pair[static_cast<std::size_t>(a) * W + b] += 1;
    }
    ++count;
  } while (next_subset_colex(subset, W));

  Eigen::MatrixXd cov(W, W);
  for (int a = 0; a < W; ++a) {
    for (int b = 0; b < W; ++b) {
      const double pab =
          static_cast<double>(pair[static_cast<std::size_t>(a) * W + b]) /
          count;
      const double pa = static_cast<double>(single[a]) / count;
      const double pb = static_cast<double>(single[b]) / count;
      cov(a, b) = pab - pa * pb;
    }
  }
  return cov;
}

Eigen::MatrixXd wholeplot_cov_formula(const SplitPlotSpec& spec) {
  const double W = spec.layout.whole_plots;
  return spec.plots_treated * spec.plots_control() / (W * (W - 1.0)) *
         centering_projection(spec.layout.whole_plots);
}

Eigen::MatrixXd enumerated_indicator_second_moment(const SplitPlotSpec& spec,
                                                   int k, int l,
                                                   std::uint64_t cap) {
  const int N = spec.layout.units();
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(N) * N, 0);
  std::uint64_t total = 0;
  enumerate_assignments(
      spec,
      [&](const Assignment& asg) {
        for (int i = 0; i < N; ++i) {
          if (asg.treatment[i] != l) continue;
          for (int j = 0; j < N; ++j) {
            if (asg.treatment[j] == k) {
              counts[static_cast<std::size_t>(i) * N + j] += 1;
            }
          }
        }
        ++total;
      },
      cap);
  Eigen::MatrixXd out(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      out(i, j) =
          static_cast<double>(counts[static_cast<std::size_t>(i) * N + j]) /
          total;
    }
  }
  return out;
}

Eigen::MatrixXd indicator_second_moment_formula(const SplitPlotSpec& spec,
                                                int k, int l) {
  if (level_a(k) != level_a(l)) {
    throw std::invalid_argument(
        "indicator_second_moment_formula: treatments must share the level "
        "of factor A");
  }
  const double N = spec.layout.units();
  const int W = spec.layout.whole_plots;
  const int M = spec.layout.subplots_per_plot;
  const double wz = spec.plots_observing(k);
  const double mk = spec.subplots_observing(k);
  const double ml = spec.subplots_observing(l);
  const double wp = spec.plots_treated;
  const double wm = spec.plots_control();
  const double mp = spec.subplots_treated;
  const double mm = spec.subplots_control();

  const Eigen::MatrixXd between = kronecker(
      centering_projection(W), Eigen::MatrixXd::Constant(M, M, 1.0 / M));
  const Eigen::MatrixXd within =
      kronecker(Eigen::MatrixXd::Identity(W, W), centering_projection(M));

  return wp * wm * ml * mk / (N * (W - 1.0)) * between +
         level_b(k) * level_b(l) * wz * mp * mm / (N * (M - 1.0)) * within +
         wz * wz * mk * ml / (N * N) *
             Eigen::MatrixXd::Ones(static_cast<int>(N), static_cast<int>(N));
}

Eigen::Matrix4d enumerated_between_sample_cov_mean(
    const PotentialOutcomeMatrix& pom, const SplitPlotSpec& spec,
    std::uint64_t cap) {
  if (!spec.variance_estimable()) {
    throw std::domain_error(
        "enumerated_between_sample_cov_mean: spec is not variance-estimable");
  }
  CompensatedSum sums[4][4];
  std::uint64_t count = 0;
  enumerate_assignments(
      spec,
      [&](const Assignment& asg) {
        const ObservedData data = observe(pom, asg);
        const Eigen::Matrix4d s = sample_between_covariances(data, spec);
        for (int a = 0; a < 4; ++a) {
          for (int b = 0; b < 4; ++b) sums[a][b].add(s(a, b));
        }
        ++count;
      },
      cap);
  Eigen::Matrix4d out;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) out(a, b) = sums[a][b].value() / count;
  }
  return out;
}

Eigen::Matrix4d expected_between_sample_cov(const PotentialOutcomeMatrix& pom,
                                            const SplitPlotSpec& spec) {
  const CovarianceSummary cov = summarize_covariances(pom);
  const double rb = spec.ratio_b();
  const double M = spec.layout.subplots_per_plot;
  Eigen::Matrix2d pattern;
  pattern << rb, -1.0, -1.0, 1.0 / rb;

  Eigen::Matrix4d out = Eigen::Matrix4d::Zero();
  out.topLeftCorner<2, 2>() =
      cov.between.topLeftCorner<2, 2>() +
      pattern.cwiseProduct(cov.within.topLeftCorner<2, 2>()) / M;
  out.bottomRightCorner<2, 2>() =
      cov.between.bottomRightCorner<2, 2>() +
      pattern.cwiseProduct(cov.within.bottomRightCorner<2, 2>()) / M;
  return out;
}

}  // namespace splitplot
