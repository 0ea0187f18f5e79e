#pragma once

#include <cstdint>
#include <string_view>

#include "mtrl/nn/dense_net.hpp"

namespace mtrl::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment accumulators mirroring one DenseNet.
struct AdamState {
  AdamState() = default;
  explicit AdamState(const DenseNet& net, AdamConfig config = {});

  AdamConfig config;
  Gradients first_moment;
  Gradients second_moment;
  std::int64_t step = 0;
};

// One bias-corrected Adam update. Throws NonFiniteError (naming the block,
// prefixed by `label`) before touching any parameter if a gradient is NaN/Inf.
void adam_step(DenseNet& net, const Gradients& grads, AdamState& state, double lr,
               std::string_view label = {});

// grads.weight[i] += coefficient * net.layer(i).weight; biases are not penalized.
void add_weight_decay(Gradients& grads, const DenseNet& net, double coefficient);

}  // namespace mtrl::nn
