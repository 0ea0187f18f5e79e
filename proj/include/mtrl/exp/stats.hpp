#pragma once

#include <span>

namespace mtrl::exp {

struct PairedTest {
  double mean_difference = 0.0;  // mean of a_i - b_i
  double t = 0.0;
  double p_greater = 1.0;  // one-sided p-value for mean(a - b) > 0
  std::size_t n = 0;
};

// Paired t-test on a_i - b_i, n - 1 degrees of freedom. Constant non-zero
// differences give p = 0 (or 1); all-zero differences give p = 1.
PairedTest paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace mtrl::exp
