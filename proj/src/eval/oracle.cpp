#include "mtrl/eval/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mtrl/error.hpp"

namespace mtrl::eval {

QOracle::QOracle(const envs::EnvSpec& spec, OracleOptions options) : spec_(spec) {
  if (!spec.actions.discrete()) throw ConfigError(spec.name + ": oracle needs a discrete action set");
  if (!spec.deterministic) throw ConfigError(spec.name + ": oracle needs deterministic dynamics");
  const auto d = static_cast<std::size_t>(spec.state_dim);
  resolution_ = options.resolution.empty() ? std::vector<int>(d, 200) : options.resolution;
  if (resolution_.size() != d) throw ConfigError("oracle resolution must give one entry per state dimension");
  std::size_t nodes = 1;
  for (int r : resolution_) {
    if (r < 2) throw ConfigError("oracle resolution must be at least 2 per dimension");
    nodes *= static_cast<std::size_t>(r);
  }
  const auto n_actions = spec.actions.values.size();

  // Successor stencils and rewards are fixed; only V changes between sweeps.
  std::vector<Stencil> next(nodes * n_actions);
  std::vector<double> reward(nodes * n_actions);
  std::vector<char> absorbing(nodes * n_actions);
  envs::Rng rng(0);
  for (std::size_t n = 0; n < nodes; ++n) {
    const Vector s = node_state(n);
    for (std::size_t a = 0; a < n_actions; ++a) {
      const auto tr = envs::env_step(spec, s, envs::Action::discrete(static_cast<int>(a)), rng);
      const std::size_t k = n * n_actions + a;
      reward[k] = tr.reward;
      absorbing[k] = tr.absorbing;
      if (!tr.absorbing) next[k] = stencil(tr.next_state);
    }
  }

  values_.assign(nodes, 0.0);
  q_table_.assign(nodes * n_actions, 0.0);
  std::vector<double> fresh(nodes);
  for (int it = 0; it < options.max_iterations; ++it) {
    double residual = 0.0;
    for (std::size_t n = 0; n < nodes; ++n) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < n_actions; ++a) {
        const std::size_t k = n * n_actions + a;
        const double q = reward[k] + (absorbing[k] ? 0.0 : spec.gamma * interpolate(next[k], values_));
        q_table_[k] = q;
        best = std::max(best, q);
      }
      fresh[n] = best;
      residual = std::max(residual, std::abs(best - values_[n]));
    }
    values_.swap(fresh);
    residuals_.push_back(residual);
    if (residual < options.tolerance) return;
  }
  std::ostringstream msg;
  msg << spec.name << ": value iteration did not converge in " << options.max_iterations
      << " sweeps (residual " << residuals_.back() << ")";
  throw std::runtime_error(msg.str());
}

Vector QOracle::node_state(std::size_t node) const {
  Vector s(spec_.state_dim);
  for (std::size_t i = 0; i < resolution_.size(); ++i) {
    const auto r = static_cast<std::size_t>(resolution_[i]);
    const double frac = static_cast<double>(node % r) / static_cast<double>(r - 1);
    node /= r;
    const auto e = static_cast<Eigen::Index>(i);
    s(e) = spec_.state_low(e) + frac * (spec_.state_high(e) - spec_.state_low(e));
  }
  return s;
}

double QOracle::table(std::size_t node, int action) const {
  return q_table_.at(node * spec_.actions.values.size() + static_cast<std::size_t>(action));
}

QOracle::Stencil QOracle::stencil(const Vector& state) const {
  const std::size_t d = resolution_.size();
  std::vector<std::size_t> base(d);
  std::vector<double> frac(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    const double span = spec_.state_high(e) - spec_.state_low(e);
    const double cells = resolution_[i] - 1;
    double x = (state(e) - spec_.state_low(e)) / span * cells;
    x = std::clamp(x, 0.0, cells);
    auto b = static_cast<std::size_t>(std::floor(x));
    if (b >= static_cast<std::size_t>(cells)) b = static_cast<std::size_t>(cells) - 1;
    base[i] = b;
    frac[i] = x - static_cast<double>(b);
  }
  Stencil st;
  for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
    double w = 1.0;
    std::size_t index = 0, stride = 1;
    for (std::size_t i = 0; i < d; ++i) {
      const bool up = (corner >> i) & 1U;
      w *= up ? frac[i] : 1.0 - frac[i];
      index += (base[i] + (up ? 1 : 0)) * stride;
      stride *= static_cast<std::size_t>(resolution_[i]);
    }
    if (w == 0.0) continue;
    st.nodes.push_back(static_cast<std::uint32_t>(index));
    st.weights.push_back(w);
  }
  return st;
}

double QOracle::interpolate(const Stencil& st, const std::vector<double>& v) const {
  double out = 0.0;
  for (std::size_t i = 0; i < st.nodes.size(); ++i) out += st.weights[i] * v[st.nodes[i]];
  return out;
}

double QOracle::value(const Vector& state) const { return interpolate(stencil(state), values_); }

Vector QOracle::q(const Vector& state) const {
  const auto n_actions = static_cast<Eigen::Index>(spec_.actions.values.size());
  Vector out(n_actions);
  envs::Rng rng(0);
  for (Eigen::Index a = 0; a < n_actions; ++a) {
    const auto tr = envs::env_step(spec_, state, envs::Action::discrete(static_cast<int>(a)), rng);
    out(a) = tr.reward + (tr.absorbing ? 0.0 : spec_.gamma * value(tr.next_state));
  }
  return out;
}

int QOracle::greedy_action(const Vector& state) const {
  Eigen::Index best;
  q(state).maxCoeff(&best);
  return static_cast<int>(best);
}

QFunction QOracle::as_function() const {
  return [this](const Vector& s) { return q(s); };
}

std::vector<Vector> sample_probe_states(const envs::EnvSpec& spec, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector s(spec.state_dim);
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      s(j) = spec.state_low(j) + unit(rng) * (spec.state_high(j) - spec.state_low(j));
    }
    out.push_back(std::move(s));
  }
  return out;
}

double q_l1_error(const QFunction& q, const QOracle& oracle, const std::vector<Vector>& probes) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& s : probes) {
    const Vector truth = oracle.q(s);
    const Vector est = q(s);
    if (est.size() != truth.size()) throw ShapeError("q_l1_error: action-value width mismatch");
    total += (truth - est).cwiseAbs().sum();
    count += static_cast<std::size_t>(truth.size());
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

double relative_l1_change(const QOracle& a, const QOracle& b, const std::vector<Vector>& probes) {
  double diff = 0.0, scale = 0.0;
  for (const auto& s : probes) {
    const Vector qa = a.q(s);
    const Vector qb = b.q(s);
    diff += (qa - qb).cwiseAbs().sum();
    scale += qb.cwiseAbs().sum();
  }
  return scale == 0.0 ? diff : diff / scale;
}

}  // namespace mtrl::eval
