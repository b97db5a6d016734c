#include "splitplot/layout.hpp"

namespace splitplot {

const char* effect_name(Effect f) {
  switch (f) {
    case Effect::A:
      return "A";
    case Effect::B:
      return "B";
    case Effect::AB:
      return "AB";
  }
  return "?";
}

Eigen::Vector4d contrast(Effect f) {
  Eigen::Vector4d g;
  for (int k = 1; k <= kNumTreatments; ++k) {
    int level = 0;
    switch (f) {
      case Effect::A:
        level = level_a(k);
        break;
      case Effect::B:
        level = level_b(k);
        break;
      case Effect::AB:
        level = level_ab(k);
        break;
    }
    g(k - 1) = static_cast<double>(level);
  }
  return g;
}

Eigen::Matrix<double, 4, 3> contrast_columns() {
  Eigen::Matrix<double, 4, 3> g;
  g.col(0) = contrast(Effect::A);
  g.col(1) = contrast(Effect::B);
  g.col(2) = contrast(Effect::AB);
  return g;
}

Eigen::Matrix4d design_matrix() {
  Eigen::Matrix4d d;
  d.col(0) = Eigen::Vector4d::Ones();
  d.rightCols<3>() = contrast_columns();
  return 0.5 * d;
}

}  // namespace splitplot
