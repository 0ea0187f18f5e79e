#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mtrl/envs/env.hpp"

namespace mtrl::eval {

using envs::Vector;

// Action values of every discrete action at a state.
using QFunction = std::function<Vector(const Vector& state)>;

struct OracleOptions {
  std::vector<int> resolution;  // nodes per state dimension; empty = 200 each
  double tolerance = 1e-6;
  int max_iterations = 20000;
};

// Q* of a deterministic discrete-action task by value iteration on a regular
// grid over the nominal state box, successor values by multilinear
// interpolation. Off-grid queries use one exact step followed by the
// interpolated value, so on grid nodes they reproduce the table.
class QOracle {
 public:
  QOracle(const envs::EnvSpec& spec, OracleOptions options = {});

  const envs::EnvSpec& spec() const { return spec_; }
  const std::vector<int>& resolution() const { return resolution_; }
  std::size_t node_count() const { return values_.size(); }
  int iterations() const { return static_cast<int>(residuals_.size()); }
  // Sup-norm change of V per sweep.
  const std::vector<double>& residuals() const { return residuals_; }

  Vector node_state(std::size_t node) const;
  // Converged table entry; rows are nodes.
  double table(std::size_t node, int action) const;
  double value(const Vector& state) const;  // interpolated V*
  Vector q(const Vector& state) const;
  int greedy_action(const Vector& state) const;
  QFunction as_function() const;

 private:
  struct Stencil {
    std::vector<std::uint32_t> nodes;
    std::vector<double> weights;
  };
  Stencil stencil(const Vector& state) const;
  double interpolate(const Stencil& st, const std::vector<double>& v) const;

  envs::EnvSpec spec_;
  std::vector<int> resolution_;
  std::vector<double> values_;   // V* on nodes
  std::vector<double> q_table_;  // node-major, |A| per node
  std::vector<double> residuals_;
};

// `n` states uniform in the nominal state box; fixed by `seed`.
std::vector<Vector> sample_probe_states(const envs::EnvSpec& spec, std::size_t n, std::uint64_t seed);

// Mean |Q*(s,a) - Q(s,a)| over probes x actions.
double q_l1_error(const QFunction& q, const QOracle& oracle, const std::vector<Vector>& probes);

// Mean of |Q_a - Q_b| / mean |Q_b| over probes x actions.
double relative_l1_change(const QOracle& a, const QOracle& b, const std::vector<Vector>& probes);

}  // namespace mtrl::eval
