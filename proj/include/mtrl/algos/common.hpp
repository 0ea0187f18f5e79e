#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mtrl/envs/env.hpp"
#include "mtrl/mtnet/multitask_network.hpp"

namespace mtrl::algos {

using envs::EnvSpec;
using envs::Transition;
using mtnet::Matrix;
using mtnet::MultiTaskNetwork;
using mtnet::Vector;
using Rng = std::mt19937_64;

// Independent generator for one purpose (init, env, exploration, ...) of a run.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);
// Sub-stream `index` (e.g. a task) of a purpose.
Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

enum Stream : std::uint64_t { init_stream = 1, env_stream, explore_stream, sample_stream, eval_stream, data_stream };

// Scaled states of `ts`, one column each (next states when `next`).
Matrix state_matrix(const EnvSpec& spec, std::span<const Transition* const> ts, bool next);

// Continuous action in the task's box mapped to [-1, 1]^d, and back.
Vector normalize_action(const EnvSpec& spec, const Vector& a);
Vector denormalize_action(const EnvSpec& spec, const Vector& y);

std::vector<mtnet::TaskShape> discrete_shapes(std::span<const EnvSpec> tasks);

}  // namespace mtrl::algos
