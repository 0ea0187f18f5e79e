#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mtrl/algos/common.hpp"
#include "mtrl/algos/exploration.hpp"
#include "mtrl/eval/curves.hpp"
#include "mtrl/nn/loss.hpp"

namespace mtrl::algos {

struct TrainHooks {
  // Trunk freeze state for training epoch e (0-based), applied before its first step.
  std::function<bool(int epoch)> shared_frozen;
  std::function<void(std::int64_t step, const MultiTaskNetwork& online, const MultiTaskNetwork& target)> on_step;
  std::function<void(const eval::EpochRecord&)> on_epoch;
};

struct DqnConfig {
  int epochs = 30;
  int steps_per_epoch = 1000;
  int eval_steps = 2000;
  std::size_t batch_per_task = 100;
  std::size_t capacity = 5000;
  std::size_t warmup = 100;
  double lr = 1e-3;
  int target_update = 100;
  EpsilonSchedule epsilon{1.0, 0.01, 5000};
  nn::LossSpec loss{nn::LossKind::huber, 1.0};
  void validate() const;
};

struct DqnResult {
  MultiTaskNetwork net;
  // Epoch 0 is the untrained network; epoch e >= 1 follows training epoch e.
  std::vector<eval::EpochRecord> records;
  std::vector<std::int64_t> env_steps;  // per task
};

// One algorithm step = one epsilon-greedy step in every task, then one update
// on an equal-share batch. T = 1 is plain DQN.
DqnResult dqn_train(std::span<const EnvSpec> tasks, MultiTaskNetwork net, const DqnConfig& config,
                    std::uint64_t seed, const TrainHooks& hooks = {});

struct DdpgConfig {
  int epochs = 20;
  int steps_per_epoch = 2000;
  int eval_steps = 2000;
  std::size_t batch_per_task = 64;
  std::size_t capacity = 50000;
  std::size_t warmup = 64;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double critic_l2 = 0.01;
  double tau = 1e-3;
  double ou_theta = 0.15;
  double ou_sigma = 0.2;
  nn::LossSpec loss{nn::LossKind::huber, 1.0};
  void validate() const;
};

struct DdpgResult {
  MultiTaskNetwork actor;
  MultiTaskNetwork critic;
  std::vector<eval::EpochRecord> records;
  std::vector<std::int64_t> env_steps;
};

// Actor heads are tanh; their output is the action normalized to [-1, 1],
// which is also what the critic receives at its trunk.
DdpgResult ddpg_train(std::span<const EnvSpec> tasks, MultiTaskNetwork actor, MultiTaskNetwork critic,
                      const DdpgConfig& config, std::uint64_t seed, const TrainHooks& hooks = {});

// Gradients of -mean_i Q_t(s_i, mu_t(s_i)) w.r.t. the actor, one entry per
// task; `states[t]` holds scaled states as columns. The critic is not changed.
std::vector<mtnet::MtGradients> actor_policy_gradients(const MultiTaskNetwork& actor, const MultiTaskNetwork& critic,
                                                       std::span<const Matrix> states);

// Environment action of the actor at an unscaled state.
Vector actor_action(const MultiTaskNetwork& actor, std::size_t task, const EnvSpec& spec, const Vector& state);

}  // namespace mtrl::algos
