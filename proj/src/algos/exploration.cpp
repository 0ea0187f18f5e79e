#include "mtrl/algos/exploration.hpp"

#include <algorithm>

namespace mtrl::algos {

double EpsilonSchedule::operator()(std::int64_t step) const {
  if (decay_steps <= 0 || step >= decay_steps) return end;
  const double frac = static_cast<double>(std::max<std::int64_t>(step, 0)) / static_cast<double>(decay_steps);
  return start + (end - start) * frac;
}

OuNoise::OuNoise(Eigen::Index dim, double theta, double sigma, double mu)
    : theta_(theta), sigma_(sigma), mu_(mu), x_(Eigen::VectorXd::Constant(dim, mu)) {}

const Eigen::VectorXd& OuNoise::sample(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index i = 0; i < x_.size(); ++i) {
    // Draw only when it matters so sigma = 0 is an exact recurrence.
    const double z = sigma_ == 0.0 ? 0.0 : n(rng);
    x_(i) += theta_ * (mu_ - x_(i)) + sigma_ * z;
  }
  return x_;
}

void OuNoise::reset() { x_.setConstant(mu_); }

}  // namespace mtrl::algos
