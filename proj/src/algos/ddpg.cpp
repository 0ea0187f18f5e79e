#include "mtrl/algos/trainer.hpp"
#include "mtrl/error.hpp"
#include "mtrl/eval/evaluate.hpp"
#include "mtrl/replay/replay_memory.hpp"

namespace mtrl::algos {

void DdpgConfig::validate() const {
  if (epochs < 0 || steps_per_epoch <= 0 || eval_steps <= 0) throw ConfigError("ddpg: epochs, steps and eval steps must be positive");
  if (batch_per_task == 0 || batch_per_task > capacity) throw ConfigError("ddpg: batch_per_task must lie in [1, capacity]");
  if (warmup == 0 || warmup > capacity) throw ConfigError("ddpg: warmup must lie in [1, capacity]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("ddpg: tau must lie in [0, 1]");
  if (!(actor_lr >= 0.0 && critic_lr >= 0.0 && critic_l2 >= 0.0)) throw ConfigError("ddpg: rates must be non-negative");
}

Vector actor_action(const MultiTaskNetwork& actor, std::size_t task, const EnvSpec& spec, const Vector& state) {
  return denormalize_action(spec, actor.forward(task, envs::scale_state(spec, state)));
}

std::vector<mtnet::MtGradients> actor_policy_gradients(const MultiTaskNetwork& actor, const MultiTaskNetwork& critic,
                                                       std::span<const Matrix> states) {
  Eigen::Index total = 0;
  for (const auto& s : states) total += s.cols();
  std::vector<mtnet::MtGradients> out;
  for (std::size_t t = 0; t < states.size(); ++t) {
    const mtnet::MtTrace act = actor.trace(t, states[t]);
    const mtnet::MtTrace q = critic.trace(t, states[t], act.output());
    const Matrix dq = Matrix::Constant(1, states[t].cols(), -1.0 / static_cast<double>(total));
    const mtnet::MtGradients cg = critic.backward(q, dq);
    out.push_back(actor.backward(act, cg.extra));
  }
  return out;
}

DdpgResult ddpg_train(std::span<const EnvSpec> tasks, MultiTaskNetwork actor, MultiTaskNetwork critic,
                      const DdpgConfig& config, std::uint64_t seed, const TrainHooks& hooks) {
  config.validate();
  const std::size_t T = tasks.size();
  if (T == 0 || actor.task_count() != T || critic.task_count() != T) throw ConfigError("ddpg: one head per task required");
  for (std::size_t t = 0; t < T; ++t) {
    const auto& spec = tasks[t];
    if (spec.actions.discrete()) throw ConfigError("ddpg: " + spec.name + " has a discrete action set");
    if (actor.input_dim(t) != spec.state_dim || actor.output_dim(t) != spec.actions.size() ||
        critic.input_dim(t) != spec.state_dim || critic.output_dim(t) != 1 || critic.extra_dim() != spec.actions.size()) {
      throw ConfigError("ddpg: networks do not match task " + spec.name);
    }
  }

  Rng env_rng = make_stream(seed, env_stream);
  Rng explore_rng = make_stream(seed, explore_stream);
  Rng sample_rng = make_stream(seed, sample_stream);
  Rng eval_rng = make_stream(seed, eval_stream);

  std::vector<replay::ReplayMemory> memories;
  std::vector<envs::Episode> episodes;
  std::vector<OuNoise> noise;
  for (std::size_t t = 0; t < T; ++t) {
    memories.emplace_back(t, config.capacity, config.warmup);
    episodes.emplace_back(tasks[t], t);
    episodes.back().reset(env_rng);
    noise.emplace_back(tasks[t].actions.size(), config.ou_theta, config.ou_sigma);
  }

  DdpgResult result{std::move(actor), std::move(critic), {}, std::vector<std::int64_t>(T, 0)};
  MultiTaskNetwork& pi = result.actor;
  MultiTaskNetwork& q = result.critic;
  MultiTaskNetwork pi_target = pi;
  MultiTaskNetwork q_target = q;

  auto record = [&](int epoch) {
    eval::EpochRecord r{epoch, {}, {}};
    for (std::size_t t = 0; t < T; ++t) {
      const eval::Policy greedy = [&](const Vector& s) {
        return envs::Action::continuous(actor_action(pi, t, tasks[t], s));
      };
      r.returns.push_back(eval::evaluate_greedy(greedy, tasks[t], config.eval_steps, eval_rng).mean());
    }
    if (hooks.on_epoch) hooks.on_epoch(r);
    result.records.push_back(std::move(r));
  };
  record(0);

  std::int64_t step = 0;
  for (int e = 0; e < config.epochs; ++e) {
    if (hooks.shared_frozen) {
      const bool frozen = hooks.shared_frozen(e);
      pi.set_shared_frozen(frozen);
      q.set_shared_frozen(frozen);
    }
    for (int i = 0; i < config.steps_per_epoch; ++i, ++step) {
      for (std::size_t t = 0; t < T; ++t) {
        auto& ep = episodes[t];
        Vector y = pi.forward(t, envs::scale_state(tasks[t], ep.state())) + noise[t].sample(explore_rng);
        y = y.cwiseMax(-1.0).cwiseMin(1.0);
        memories[t].push(ep.step(envs::Action::continuous(denormalize_action(tasks[t], y)), env_rng));
        ++result.env_steps[t];
        if (ep.done()) {
          ep.reset(env_rng);
          noise[t].reset();
        }
      }
      bool ready = true;
      for (const auto& m : memories) ready = ready && m.ready();
      if (ready) {
        const auto sampled = replay::sample_multitask(memories, config.batch_per_task, sample_rng);
        std::vector<mtnet::RegressionBatch> batch(T);
        std::vector<Matrix> states(T);
        for (std::size_t t = 0; t < T; ++t) {
          const auto& spec = tasks[t];
          auto& b = batch[t];
          const auto n = static_cast<Eigen::Index>(sampled[t].size());
          b.task = t;
          b.inputs = state_matrix(spec, sampled[t], false);
          b.extra.resize(spec.actions.size(), n);
          for (Eigen::Index c = 0; c < n; ++c) b.extra.col(c) = normalize_action(spec, sampled[t][c]->action.value);
          const Matrix next = state_matrix(spec, sampled[t], true);
          const Matrix next_q = q_target.forward_batch(t, next, pi_target.forward_batch(t, next));
          b.targets.resize(n);
          for (Eigen::Index c = 0; c < n; ++c) {
            const auto* tr = sampled[t][c];
            b.targets(c) = tr->reward + (tr->absorbing ? 0.0 : spec.gamma * next_q(0, c));
          }
          b.output_index.assign(sampled[t].size(), 0);
          states[t] = b.inputs;
        }
        q.update(batch, config.loss, config.critic_lr, config.critic_l2);
        pi.apply_gradients(actor_policy_gradients(pi, q, states), config.actor_lr);
        mtnet::sync_target(pi, pi_target, mtnet::SyncMode::soft(config.tau));
        mtnet::sync_target(q, q_target, mtnet::SyncMode::soft(config.tau));
      }
      if (hooks.on_step) hooks.on_step(step, pi, pi_target);
    }
    record(e + 1);
  }
  return result;
}

}  // namespace mtrl::algos
