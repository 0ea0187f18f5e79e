#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mtrl/algos/common.hpp"
#include "mtrl/nn/loss.hpp"

namespace mtrl::algos {

// r for absorbing transitions, r + gamma * max_a' Q(s', a') otherwise.
Vector bellman_targets(const MultiTaskNetwork& q, std::size_t task, const EnvSpec& spec,
                       std::span<const Transition* const> batch);

struct FqiConfig {
  int iterations = 50;            // K
  int epochs_per_iteration = 50;  // Adam passes over the dataset per Bellman iteration
  int minibatch_per_task = 50;    // 0 = whole dataset in one step
  double lr = 1e-3;
  nn::LossSpec loss{nn::LossKind::mse};
};

// Called with k = 0 (initial network) and after every iteration k = 1..K.
using FqiCallback = std::function<void(int k, const MultiTaskNetwork& q)>;

// Fitted Q-iteration over fixed per-task datasets, warm-starting each fit from
// the previous iterate. Datasets are subsampled to a common size first.
MultiTaskNetwork fqi_run(std::span<const EnvSpec> tasks, std::vector<std::vector<Transition>> datasets,
                         MultiTaskNetwork net, const FqiConfig& config, Rng& rng, const FqiCallback& on_iteration = {});

struct CollectConfig {
  std::size_t transitions = 2000;
  // Share collected by uniform-random episodes from uniform-random states in
  // the nominal box; the rest by epsilon-greedy episodes of a coarse value
  // iteration policy from the task's own initial state.
  double random_fraction = 0.5;
  double epsilon = 0.1;
  int coarse_resolution = 41;
};

std::vector<Transition> collect_dataset(const EnvSpec& spec, std::size_t task, const CollectConfig& config, Rng& rng);

}  // namespace mtrl::algos
