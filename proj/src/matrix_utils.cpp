#include "splitplot/matrix_utils.hpp"

namespace splitplot {

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXd centering_projection(int p) {
  return Eigen::MatrixXd::Identity(p, p) -
         Eigen::MatrixXd::Constant(p, p, 1.0 / p);
}

}  // namespace splitplot
