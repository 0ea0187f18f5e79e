#pragma once

#include <functional>
#include <vector>

#include "mtrl/envs/env.hpp"

namespace mtrl::eval {

using Policy = std::function<envs::Action(const envs::Vector& state)>;

struct EvalResult {
  std::vector<double> returns;  // discounted, one per completed episode
  int steps = 0;
  // No episode finished within the budget; `returns` then holds the
  // discounted return of the single unfinished episode.
  bool partial_only = false;
  double mean() const;
};

// Runs `policy` for `eval_steps` environment steps, starting fresh episodes as
// needed. The unfinished last episode is dropped unless it is the only one.
EvalResult evaluate_greedy(const Policy& policy, const envs::EnvSpec& spec, int eval_steps, envs::Rng& rng);

// Greedy (lowest index on ties) action of a vector of action values.
int argmax_action(const envs::Vector& q);

}  // namespace mtrl::eval
