#include "mtrl/algos/transfer.hpp"

#include <charconv>

#include "mtrl/error.hpp"

namespace mtrl::algos {

TransferMode TransferMode::parse(std::string_view text) {
  if (text == "scratch") return {scratch, 0};
  if (text == "unfreeze_0") return {unfreeze_0, 0};
  if (text == "no_unfreeze") return {no_unfreeze, 0};
  constexpr std::string_view prefix = "unfreeze_at(";
  if (text.substr(0, prefix.size()) == prefix && text.back() == ')') {
    const auto digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    int n = 0;
    auto res = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (res.ec == std::errc() && res.ptr == digits.data() + digits.size() && n >= 0) return {unfreeze_at, n};
  }
  throw ConfigError("unknown transfer mode '" + std::string(text) +
                    "' (expected scratch, unfreeze_0, no_unfreeze or unfreeze_at(N))");
}

std::string TransferMode::to_string() const {
  switch (kind) {
    case scratch: return "scratch";
    case unfreeze_0: return "unfreeze_0";
    case no_unfreeze: return "no_unfreeze";
    case unfreeze_at: return "unfreeze_at(" + std::to_string(epoch) + ")";
  }
  return "?";
}

bool TransferMode::frozen_at(int training_epoch) const {
  switch (kind) {
    case no_unfreeze: return true;
    case unfreeze_at: return training_epoch < epoch;
    default: return false;
  }
}

MultiTaskNetwork make_q_network(const mtnet::ArchitecturePreset& preset, std::span<const EnvSpec> tasks, Rng& rng) {
  return MultiTaskNetwork(preset, discrete_shapes(tasks), 0, rng);
}

MultiTaskNetwork make_actor(const mtnet::ArchitecturePreset& preset, std::span<const EnvSpec> tasks, Rng& rng) {
  std::vector<mtnet::TaskShape> shapes;
  for (const auto& t : tasks) shapes.push_back({t.state_dim, t.actions.size()});
  return MultiTaskNetwork(preset, shapes, 0, rng);
}

MultiTaskNetwork make_critic(const mtnet::ArchitecturePreset& preset, std::span<const EnvSpec> tasks, Rng& rng) {
  std::vector<mtnet::TaskShape> shapes;
  Eigen::Index action_dim = -1;
  for (const auto& t : tasks) {
    if (action_dim >= 0 && t.actions.size() != action_dim) throw ConfigError("critic: tasks differ in action dimension");
    action_dim = t.actions.size();
    shapes.push_back({t.state_dim, 1});
  }
  return MultiTaskNetwork(preset, shapes, action_dim, rng);
}

DqnResult run_transfer(const std::filesystem::path& snapshot, const EnvSpec& task, TransferMode mode,
                       const mtnet::ArchitecturePreset& preset, const DqnConfig& config, std::uint64_t seed,
                       const TrainHooks& hooks) {
  Rng init = make_stream(seed, init_stream);
  const EnvSpec tasks[] = {task};
  MultiTaskNetwork net = make_q_network(preset, tasks, init);
  if (mode.uses_snapshot()) mtnet::transplant_shared(mtnet::load_shared_section(snapshot), net);
  TrainHooks h = hooks;
  h.shared_frozen = [mode](int e) { return mode.frozen_at(e); };
  return dqn_train(tasks, std::move(net), config, seed, h);
}

DdpgResult run_transfer_ddpg(const std::filesystem::path& actor_snapshot, const std::filesystem::path& critic_snapshot,
                             const EnvSpec& task, TransferMode mode, const mtnet::ArchitecturePreset& actor_preset,
                             const mtnet::ArchitecturePreset& critic_preset, const DdpgConfig& config,
                             std::uint64_t seed, const TrainHooks& hooks) {
  Rng init = make_stream(seed, init_stream);
  const EnvSpec tasks[] = {task};
  MultiTaskNetwork actor = make_actor(actor_preset, tasks, init);
  MultiTaskNetwork critic = make_critic(critic_preset, tasks, init);
  if (mode.uses_snapshot()) {
    mtnet::transplant_shared(mtnet::load_shared_section(actor_snapshot), actor);
    mtnet::transplant_shared(mtnet::load_shared_section(critic_snapshot), critic);
  }
  TrainHooks h = hooks;
  h.shared_frozen = [mode](int e) { return mode.frozen_at(e); };
  return ddpg_train(tasks, std::move(actor), std::move(critic), config, seed, h);
}

}  // namespace mtrl::algos
