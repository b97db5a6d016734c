#pragma once

#include <Eigen/Dense>

namespace splitplot {

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Centering projection I_p - J_p / p.
Eigen::MatrixXd centering_projection(int p);

}  // namespace splitplot
