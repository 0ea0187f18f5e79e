#pragma once

#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mtrl::envs {

using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

enum class EnvKind {
  car_on_hill,
  cart_pole,
  acrobot,
  mountain_car,
  inverted_pendulum,
  torque_pendulum,
  // Small MDPs with closed-form solutions, used by tests and oracles.
  two_state_chain,
  one_step_bandit,
};

std::string_view to_string(EnvKind kind);
EnvKind env_kind_from_string(std::string_view name);

// Discrete: a non-empty list of real action values, picked by index.
// Continuous: a box [low, high].
struct ActionSpace {
  std::vector<double> values;
  Vector low;
  Vector high;

  bool discrete() const { return !values.empty(); }
  // Number of discrete actions, or the continuous action dimension.
  Eigen::Index size() const {
    return discrete() ? static_cast<Eigen::Index>(values.size()) : low.size();
  }
};

struct Action {
  int index = -1;  // discrete actions
  Vector value;    // continuous actions

  static Action discrete(int i) { return Action{i, {}}; }
  static Action continuous(Vector v) { return Action{-1, std::move(v)}; }
};

// Immutable description of one task. `parameters` holds every dynamics
// constant by name so a suite can be exported and pinned verbatim.
struct EnvSpec {
  std::string name;
  EnvKind kind = EnvKind::car_on_hill;
  Eigen::Index state_dim = 0;
  ActionSpace actions;
  double gamma = 0.99;
  int horizon = 100;
  // Nominal state box; used for input scaling, probe sampling and oracle grids.
  Vector state_low;
  Vector state_high;
  bool deterministic = true;
  std::map<std::string, double> parameters;

  double param(std::string_view key) const;
};

struct Transition {
  std::size_t task = 0;
  Vector state;
  Action action;
  double reward = 0.0;
  Vector next_state;
  // Absorbing: the Bellman backup stops here (target = r).
  bool absorbing = false;
  // Truncated by the horizon: not absorbing, the backup still bootstraps.
  bool truncated = false;
};

Vector env_reset(const EnvSpec& spec, Rng& rng);

// One control step from `state`. Never sets `truncated`; Episode does that.
// Throws std::out_of_range for actions outside the action space.
Transition env_step(const EnvSpec& spec, const Vector& state, const Action& action, Rng& rng);

// Affine map of the nominal state box onto [-1, 1]^d.
Vector scale_state(const EnvSpec& spec, const Vector& state);

// Episode bookkeeping on top of the stateless dynamics.
class Episode {
 public:
  Episode(const EnvSpec& spec, std::size_t task = 0) : spec_(&spec), task_(task) {}

  const Vector& reset(Rng& rng);
  Transition step(const Action& action, Rng& rng);

  const Vector& state() const { return state_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  bool started() const { return started_; }
  const EnvSpec& spec() const { return *spec_; }

 private:
  const EnvSpec* spec_;
  std::size_t task_;
  Vector state_;
  int steps_ = 0;
  bool done_ = true;
  bool started_ = false;
};

}  // namespace mtrl::envs
