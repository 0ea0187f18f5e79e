#include "mtrl/algos/fqi.hpp"
#include "mtrl/algos/trainer.hpp"
#include "mtrl/error.hpp"
#include "mtrl/eval/evaluate.hpp"
#include "mtrl/replay/replay_memory.hpp"

namespace mtrl::algos {

void DqnConfig::validate() const {
  if (epochs < 0 || steps_per_epoch <= 0 || eval_steps <= 0) throw ConfigError("dqn: epochs, steps and eval steps must be positive");
  if (batch_per_task == 0) throw ConfigError("dqn: batch_per_task must be positive");
  if (batch_per_task > capacity) throw ConfigError("dqn: batch_per_task exceeds replay capacity");
  if (warmup == 0 || warmup > capacity) throw ConfigError("dqn: warmup must lie in [1, capacity]");
  if (target_update <= 0) throw ConfigError("dqn: target_update must be positive");
  if (!(lr >= 0.0)) throw ConfigError("dqn: lr must be non-negative");
}

namespace {

std::vector<double> evaluate_all(std::span<const EnvSpec> tasks, const MultiTaskNetwork& net, int eval_steps, Rng& rng) {
  std::vector<double> out;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& spec = tasks[t];
    const eval::Policy greedy = [&](const Vector& s) {
      return envs::Action::discrete(eval::argmax_action(net.forward(t, envs::scale_state(spec, s))));
    };
    out.push_back(eval::evaluate_greedy(greedy, spec, eval_steps, rng).mean());
  }
  return out;
}

}  // namespace

DqnResult dqn_train(std::span<const EnvSpec> tasks, MultiTaskNetwork net, const DqnConfig& config,
                    std::uint64_t seed, const TrainHooks& hooks) {
  config.validate();
  const std::size_t T = tasks.size();
  if (T == 0 || net.task_count() != T) throw ConfigError("dqn: one head per task required");
  const auto shapes = discrete_shapes(tasks);
  for (std::size_t t = 0; t < T; ++t) {
    if (net.input_dim(t) != shapes[t].input_dim || net.output_dim(t) != shapes[t].output_dim) {
      throw ConfigError("dqn: network does not match task " + tasks[t].name);
    }
  }

  Rng env_rng = make_stream(seed, env_stream);
  Rng explore_rng = make_stream(seed, explore_stream);
  Rng sample_rng = make_stream(seed, sample_stream);
  Rng eval_rng = make_stream(seed, eval_stream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<replay::ReplayMemory> memories;
  std::vector<envs::Episode> episodes;
  for (std::size_t t = 0; t < T; ++t) {
    memories.emplace_back(t, config.capacity, config.warmup);
    episodes.emplace_back(tasks[t], t);
    episodes.back().reset(env_rng);
  }

  DqnResult result{net, {}, std::vector<std::int64_t>(T, 0)};
  MultiTaskNetwork& online = result.net;
  MultiTaskNetwork target = online;
  auto record = [&](int epoch) {
    eval::EpochRecord r{epoch, evaluate_all(tasks, online, config.eval_steps, eval_rng), {}};
    if (hooks.on_epoch) hooks.on_epoch(r);
    result.records.push_back(std::move(r));
  };
  record(0);

  std::int64_t step = 0;
  for (int e = 0; e < config.epochs; ++e) {
    if (hooks.shared_frozen) online.set_shared_frozen(hooks.shared_frozen(e));
    for (int i = 0; i < config.steps_per_epoch; ++i, ++step) {
      const double eps = config.epsilon(step);
      for (std::size_t t = 0; t < T; ++t) {
        auto& ep = episodes[t];
        const int n_actions = static_cast<int>(shapes[t].output_dim);
        int a;
        if (unit(explore_rng) < eps) {
          a = std::uniform_int_distribution<int>(0, n_actions - 1)(explore_rng);
        } else {
          a = eval::argmax_action(online.forward(t, envs::scale_state(tasks[t], ep.state())));
        }
        memories[t].push(ep.step(envs::Action::discrete(a), env_rng));
        ++result.env_steps[t];
        if (ep.done()) ep.reset(env_rng);
      }
      bool ready = true;
      for (const auto& m : memories) ready = ready && m.ready();
      if (ready) {
        const auto sampled = replay::sample_multitask(memories, config.batch_per_task, sample_rng);
        std::vector<mtnet::RegressionBatch> batch(T);
        for (std::size_t t = 0; t < T; ++t) {
          auto& b = batch[t];
          b.task = t;
          b.inputs = state_matrix(tasks[t], sampled[t], false);
          b.targets = bellman_targets(target, t, tasks[t], sampled[t]);
          for (const auto* tr : sampled[t]) b.output_index.push_back(tr->action.index);
        }
        online.update(batch, config.loss, config.lr);
      }
      if ((step + 1) % config.target_update == 0) mtnet::sync_target(online, target, mtnet::SyncMode::hard());
      if (hooks.on_step) hooks.on_step(step, online, target);
    }
    record(e + 1);
  }
  return result;
}

}  // namespace mtrl::algos
