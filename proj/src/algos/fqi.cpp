#include "mtrl/algos/fqi.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mtrl/error.hpp"
#include "mtrl/eval/oracle.hpp"

namespace mtrl::algos {

Vector bellman_targets(const MultiTaskNetwork& q, std::size_t task, const EnvSpec& spec,
                       std::span<const Transition* const> batch) {
  const Matrix next = q.forward_batch(task, state_matrix(spec, batch, true));
  Vector y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    y(c) = batch[i]->reward + (batch[i]->absorbing ? 0.0 : spec.gamma * next.col(c).maxCoeff());
  }
  return y;
}

MultiTaskNetwork fqi_run(std::span<const EnvSpec> tasks, std::vector<std::vector<Transition>> datasets,
                         MultiTaskNetwork net, const FqiConfig& config, Rng& rng, const FqiCallback& on_iteration) {
  const std::size_t T = tasks.size();
  if (datasets.size() != T || net.task_count() != T) throw ConfigError("fqi_run: one dataset and head per task");
  std::size_t n = std::numeric_limits<std::size_t>::max();
  for (const auto& d : datasets) n = std::min(n, d.size());
  if (n == 0) throw ConfigError("fqi_run: empty dataset");
  for (auto& d : datasets) {
    if (d.size() > n) {
      std::shuffle(d.begin(), d.end(), rng);
      d.resize(n);
    }
  }
  const std::size_t m = config.minibatch_per_task > 0 ? std::min<std::size_t>(config.minibatch_per_task, n) : n;

  std::vector<std::vector<const Transition*>> refs(T);
  std::vector<Matrix> inputs(T);
  std::vector<std::vector<Eigen::Index>> actions(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (const auto& tr : datasets[t]) {
      refs[t].push_back(&tr);
      actions[t].push_back(tr.action.index);
    }
    inputs[t] = state_matrix(tasks[t], refs[t], false);
  }

  if (on_iteration) on_iteration(0, net);
  std::vector<std::size_t> order(n);
  for (int k = 1; k <= config.iterations; ++k) {
    std::vector<Vector> targets(T);
    for (std::size_t t = 0; t < T; ++t) targets[t] = bellman_targets(net, t, tasks[t], refs[t]);
    for (int e = 0; e < config.epochs_per_iteration; ++e) {
      std::vector<std::vector<std::size_t>> perm(T);
      for (std::size_t t = 0; t < T; ++t) {
        perm[t].resize(n);
        std::iota(perm[t].begin(), perm[t].end(), 0);
        if (m < n) std::shuffle(perm[t].begin(), perm[t].end(), rng);
      }
      for (std::size_t start = 0; start + m <= n; start += m) {
        std::vector<mtnet::RegressionBatch> batch(T);
        for (std::size_t t = 0; t < T; ++t) {
          auto& b = batch[t];
          b.task = t;
          b.inputs.resize(tasks[t].state_dim, static_cast<Eigen::Index>(m));
          b.targets.resize(static_cast<Eigen::Index>(m));
          b.output_index.resize(m);
          for (std::size_t j = 0; j < m; ++j) {
            const std::size_t i = perm[t][start + j];
            const auto c = static_cast<Eigen::Index>(j);
            b.inputs.col(c) = inputs[t].col(static_cast<Eigen::Index>(i));
            b.targets(c) = targets[t](static_cast<Eigen::Index>(i));
            b.output_index[j] = actions[t][i];
          }
        }
        net.update(batch, config.loss, config.lr);
      }
    }
    if (on_iteration) on_iteration(k, net);
  }
  return net;
}

std::vector<Transition> collect_dataset(const EnvSpec& spec, std::size_t task, const CollectConfig& config, Rng& rng) {
  if (!spec.actions.discrete()) throw ConfigError("collect_dataset: discrete action set required");
  const auto n_actions = static_cast<int>(spec.actions.values.size());
  std::uniform_int_distribution<int> any_action(0, n_actions - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Transition> out;
  out.reserve(config.transitions);
  const auto random_quota = static_cast<std::size_t>(config.random_fraction * static_cast<double>(config.transitions));

  while (out.size() < random_quota) {
    Vector s(spec.state_dim);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      s(i) = spec.state_low(i) + unit(rng) * (spec.state_high(i) - spec.state_low(i));
    }
    for (int step = 0; step < spec.horizon && out.size() < random_quota; ++step) {
      Transition tr = envs::env_step(spec, s, envs::Action::discrete(any_action(rng)), rng);
      tr.task = task;
      tr.truncated = !tr.absorbing && step + 1 == spec.horizon;
      s = tr.next_state;
      const bool stop = tr.absorbing;
      out.push_back(std::move(tr));
      if (stop) break;
    }
  }
  if (out.size() >= config.transitions) return out;

  eval::OracleOptions coarse;
  coarse.resolution.assign(static_cast<std::size_t>(spec.state_dim), config.coarse_resolution);
  const eval::QOracle guide(spec, coarse);
  while (out.size() < config.transitions) {
    envs::Episode ep(spec, task);
    ep.reset(rng);
    while (!ep.done() && out.size() < config.transitions) {
      const int a = unit(rng) < config.epsilon ? any_action(rng) : guide.greedy_action(ep.state());
      out.push_back(ep.step(envs::Action::discrete(a), rng));
    }
  }
  return out;
}

}  // namespace mtrl::algos
