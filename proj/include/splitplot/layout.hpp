#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace splitplot {

inline constexpr int kNumTreatments = 4;

// N units nested under W whole-plots of M sub-plots each, indexed (w, m) in
// lexicographic order: unit i = w * M + m for 0-based w, m.
struct BlockLayout {
  int whole_plots;        // W
  int subplots_per_plot;  // M

  BlockLayout(int W, int M) : whole_plots(W), subplots_per_plot(M) {
    if (W < 2 || M < 2) {
      throw std::invalid_argument("BlockLayout: requires W >= 2 and M >= 2");
    }
  }

  int units() const { return whole_plots * subplots_per_plot; }

  int unit_index(int w, int m) const { return w * subplots_per_plot + m; }

  friend bool operator==(const BlockLayout& x, const BlockLayout& y) {
    return x.whole_plots == y.whole_plots &&
           x.subplots_per_plot == y.subplots_per_plot;
  }
};

// Factorial effects of interest. The array order (A, B, AB) matches the
// 3-vectors used throughout.
enum class Effect { A = 0, B = 1, AB = 2 };
inline constexpr int kNumEffects = 3;
const char* effect_name(Effect f);

// Treatments 1..4 code the level pairs (-,-), (-,+), (+,-), (+,+) in
// lexicographic order; the contrast vectors record the per-treatment levels.
inline int level_a(int treatment) { return treatment <= 2 ? -1 : +1; }
inline int level_b(int treatment) { return treatment % 2 == 1 ? -1 : +1; }
inline int level_ab(int treatment) { return level_a(treatment) * level_b(treatment); }

inline int treatment_for_levels(int a, int b) {
  return (a > 0 ? 3 : 1) + (b > 0 ? 1 : 0);
}

Eigen::Vector4d contrast(Effect f);

/// 4x3 matrix with the A, B, AB contrast vectors as columns.
Eigen::Matrix<double, 4, 3> contrast_columns();

/// Orthogonal design matrix, one half of (1, contrast_A, contrast_B, contrast_AB).
Eigen::Matrix4d design_matrix();

}  // namespace splitplot
