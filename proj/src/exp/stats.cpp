#include "mtrl/exp/stats.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "mtrl/error.hpp"

namespace mtrl::exp {

PairedTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("paired_t_test: samples differ in length");
  if (a.size() < 2) throw ConfigError("paired_t_test: at least two pairs required");
  PairedTest out;
  out.n = a.size();
  const double n = static_cast<double>(out.n);
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += std::pow(a[i] - b[i] - mean, 2);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  out.mean_difference = mean;
  if (se == 0.0) {
    out.t = mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
    out.p_greater = mean > 0.0 ? 0.0 : 1.0;
    return out;
  }
  out.t = mean / se;
  const boost::math::students_t dist(n - 1.0);
  out.p_greater = boost::math::cdf(boost::math::complement(dist, out.t));
  return out;
}

}  // namespace mtrl::exp
