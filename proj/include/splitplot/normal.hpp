#pragma once

namespace splitplot {

/// Inverse of the standard normal CDF (Wichura's PPND16 rational
/// approximation, absolute error below 1e-15). Requires 0 < p < 1.
double normal_quantile(double p);

}  // namespace splitplot
