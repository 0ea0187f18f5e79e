#pragma once

// Test-only numerical oracles. Nothing here calls the backward pass.

#include <cmath>
#include <functional>
#include <span>

namespace mtrl::testing {

// Central difference of `f` w.r.t. `param`, restoring the value afterwards.
inline double central_difference(double& param, const std::function<double()>& f,
                                 double step = 1e-5) {
  const double saved = param;
  param = saved + step;
  const double up = f();
  param = saved - step;
  const double down = f();
  param = saved;
  return (up - down) / (2.0 * step);
}

// Relative error with an absolute floor so that near-zero gradients compare
// on an absolute scale.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace mtrl::testing
