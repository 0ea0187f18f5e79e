#include "mtrl/nn/adam.hpp"

#include <cmath>
#include <string>

#include "mtrl/error.hpp"

namespace mtrl::nn {

AdamState::AdamState(const DenseNet& net, AdamConfig cfg)
    : config(cfg), first_moment(net.zero_gradients()), second_moment(net.zero_gradients()) {}

void adam_step(DenseNet& net, const Gradients& grads, AdamState& state, double lr,
               std::string_view label) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be finite and >= 0");
  if (grads.weight.size() != net.layer_count() ||
      state.first_moment.weight.size() != net.layer_count()) {
    throw ShapeError("gradient/optimizer state does not match network");
  }
  const auto names = net.block_names();
  const auto g_blocks = grads.blocks();
  auto p_blocks = net.parameter_blocks();
  for (std::size_t b = 0; b < g_blocks.size(); ++b) {
    if (g_blocks[b].size() != p_blocks[b].size()) {
      throw ShapeError(std::string(label) + " " + names[b] + ": gradient shape mismatch");
    }
    for (double v : g_blocks[b]) {
      if (!std::isfinite(v)) {
        throw NonFiniteError("non-finite gradient in " +
                             (label.empty() ? names[b] : std::string(label) + " " + names[b]));
      }
    }
  }

  state.step += 1;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  auto m_blocks = state.first_moment.blocks();
  auto v_blocks = state.second_moment.blocks();
  for (std::size_t b = 0; b < p_blocks.size(); ++b) {
    auto p = p_blocks[b];
    auto g = g_blocks[b];
    auto m = m_blocks[b];
    auto v = v_blocks[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

void add_weight_decay(Gradients& grads, const DenseNet& net, double coefficient) {
  if (coefficient == 0.0) return;
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    grads.weight.at(i) += coefficient * net.layer(i).weight;
  }
}

}  // namespace mtrl::nn
