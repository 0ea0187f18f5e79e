#include "mtrl/eval/evaluate.hpp"

#include <numeric>
#include <stdexcept>

namespace mtrl::eval {

double EvalResult::mean() const {
  if (returns.empty()) return 0.0;
  return std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
}

EvalResult evaluate_greedy(const Policy& policy, const envs::EnvSpec& spec, int eval_steps, envs::Rng& rng) {
  if (eval_steps <= 0) throw std::invalid_argument("evaluate_greedy: eval_steps must be positive");
  EvalResult out;
  envs::Episode ep(spec);
  ep.reset(rng);
  double ret = 0.0, discount = 1.0;
  while (out.steps < eval_steps) {
    const auto tr = ep.step(policy(ep.state()), rng);
    ++out.steps;
    ret += discount * tr.reward;
    discount *= spec.gamma;
    if (ep.done()) {
      out.returns.push_back(ret);
      ret = 0.0;
      discount = 1.0;
      if (out.steps < eval_steps) ep.reset(rng);
    }
  }
  if (out.returns.empty()) {
    out.returns.push_back(ret);
    out.partial_only = true;
  }
  return out;
}

int argmax_action(const envs::Vector& q) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i) {
    if (q(i) > q(best)) best = i;
  }
  return static_cast<int>(best);
}

}  // namespace mtrl::eval
