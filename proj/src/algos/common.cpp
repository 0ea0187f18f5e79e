#include "mtrl/algos/common.hpp"

#include "mtrl/error.hpp"

namespace mtrl::algos {

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),   static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(index),  static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

Matrix state_matrix(const EnvSpec& spec, std::span<const Transition* const> ts, bool next) {
  Matrix m(spec.state_dim, static_cast<Eigen::Index>(ts.size()));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = envs::scale_state(spec, next ? ts[i]->next_state : ts[i]->state);
  }
  return m;
}

Vector normalize_action(const EnvSpec& spec, const Vector& a) {
  const auto& lo = spec.actions.low;
  const auto& hi = spec.actions.high;
  return (2.0 * (a - lo).array() / (hi - lo).array() - 1.0).matrix();
}

Vector denormalize_action(const EnvSpec& spec, const Vector& y) {
  const auto& lo = spec.actions.low;
  const auto& hi = spec.actions.high;
  Vector a = (lo.array() + (y.array() + 1.0) * 0.5 * (hi - lo).array()).matrix();
  return a.cwiseMax(lo).cwiseMin(hi);
}

std::vector<mtnet::TaskShape> discrete_shapes(std::span<const EnvSpec> tasks) {
  std::vector<mtnet::TaskShape> shapes;
  for (const auto& t : tasks) {
    if (!t.actions.discrete()) throw ConfigError(t.name + ": discrete action set required");
    shapes.push_back({t.state_dim, static_cast<Eigen::Index>(t.actions.values.size())});
  }
  return shapes;
}

}  // namespace mtrl::algos
