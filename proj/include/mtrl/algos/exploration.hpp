#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace mtrl::algos {

// Linear decay from `start` to `end` over `decay_steps`, constant afterwards.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.01;
  std::int64_t decay_steps = 5000;
  double operator()(std::int64_t step) const;
};

// x <- x + theta (mu - x) + sigma N(0, 1), per dimension.
class OuNoise {
 public:
  OuNoise(Eigen::Index dim, double theta = 0.15, double sigma = 0.2, double mu = 0.0);
  const Eigen::VectorXd& sample(std::mt19937_64& rng);
  void reset();
  const Eigen::VectorXd& state() const { return x_; }
  void set_state(const Eigen::VectorXd& x) { x_ = x; }

 private:
  double theta_, sigma_, mu_;
  Eigen::VectorXd x_;
};

}  // namespace mtrl::algos
