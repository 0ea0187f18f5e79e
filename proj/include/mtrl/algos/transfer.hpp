#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "mtrl/algos/trainer.hpp"
#include "mtrl/mtnet/preset.hpp"

namespace mtrl::algos {

struct TransferMode {
  enum Kind { scratch, unfreeze_0, no_unfreeze, unfreeze_at };
  Kind kind = scratch;
  int epoch = 0;  // unfreeze_at only: training epochs 0..epoch-1 run frozen

  static TransferMode parse(std::string_view text);  // "scratch", "unfreeze_0", "no_unfreeze", "unfreeze_at(10)"
  std::string to_string() const;
  bool uses_snapshot() const { return kind != scratch; }
  bool frozen_at(int training_epoch) const;
};

MultiTaskNetwork make_q_network(const mtnet::ArchitecturePreset& preset, std::span<const EnvSpec> tasks, Rng& rng);
MultiTaskNetwork make_actor(const mtnet::ArchitecturePreset& preset, std::span<const EnvSpec> tasks, Rng& rng);
MultiTaskNetwork make_critic(const mtnet::ArchitecturePreset& preset, std::span<const EnvSpec> tasks, Rng& rng);

// Single-task DQN on `task`, its trunk taken from a multi-task snapshot unless
// the mode is scratch, frozen per the mode.
DqnResult run_transfer(const std::filesystem::path& snapshot, const EnvSpec& task, TransferMode mode,
                       const mtnet::ArchitecturePreset& preset, const DqnConfig& config, std::uint64_t seed,
                       const TrainHooks& hooks = {});

DdpgResult run_transfer_ddpg(const std::filesystem::path& actor_snapshot, const std::filesystem::path& critic_snapshot,
                             const EnvSpec& task, TransferMode mode, const mtnet::ArchitecturePreset& actor_preset,
                             const mtnet::ArchitecturePreset& critic_preset, const DdpgConfig& config,
                             std::uint64_t seed, const TrainHooks& hooks = {});

}  // namespace mtrl::algos
