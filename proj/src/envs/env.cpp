#include "mtrl/envs/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mtrl/error.hpp"

namespace mtrl::envs {

namespace {

constexpr double pi = std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a + pi, 2.0 * pi);
  if (a < 0.0) a += 2.0 * pi;
  return a - pi;
}

// Classic fourth-order Runge-Kutta over `substeps` equal sub-intervals.
template <class Deriv>
Vector rk4(Deriv f, Vector y, double dt, int substeps) {
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    const Vector k1 = f(y);
    const Vector k2 = f(y + 0.5 * h * k1);
    const Vector k3 = f(y + 0.5 * h * k2);
    const Vector k4 = f(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

double discrete_value(const EnvSpec& spec, const Action& a) {
  if (!spec.actions.discrete()) throw std::out_of_range(spec.name + " expects a continuous action");
  if (a.index < 0 || a.index >= static_cast<int>(spec.actions.values.size())) {
    throw std::out_of_range(spec.name + ": action index " + std::to_string(a.index) +
                            " outside [0, " + std::to_string(spec.actions.values.size()) + ")");
  }
  return spec.actions.values[static_cast<std::size_t>(a.index)];
}

Vector continuous_value(const EnvSpec& spec, const Action& a) {
  if (spec.actions.discrete()) throw std::out_of_range(spec.name + " expects a discrete action");
  if (a.value.size() != spec.actions.low.size()) {
    throw std::out_of_range(spec.name + ": action has dimension " + std::to_string(a.value.size()));
  }
  for (Eigen::Index i = 0; i < a.value.size(); ++i) {
    if (!(a.value(i) >= spec.actions.low(i) && a.value(i) <= spec.actions.high(i))) {
      throw std::out_of_range(spec.name + ": action component " + std::to_string(i) +
                              " outside its bounds");
    }
  }
  return a.value;
}

void check_state(const EnvSpec& spec, const Vector& s) {
  if (s.size() != spec.state_dim) {
    throw ShapeError(spec.name + ": state has dimension " + std::to_string(s.size()) +
                     ", expected " + std::to_string(spec.state_dim));
  }
}

// ---- Car-On-Hill ----------------------------------------------------------

struct HillSlope {
  double d1;  // Hill'(p)
  double d2;  // Hill''(p)
};

HillSlope hill_slope(double p) {
  if (p < 0.0) return {2.0 * p + 1.0, 2.0};
  const double q = 1.0 + 5.0 * p * p;
  return {1.0 / std::pow(q, 1.5), -15.0 * p / std::pow(q, 2.5)};
}

Transition step_car_on_hill(const EnvSpec& spec, const Vector& s, const Action& a) {
  const double u = discrete_value(spec, a);
  const double m = spec.param("mass");
  const double g = spec.param("gravity");
  auto deriv = [&](const Vector& y) {
    const auto [d1, d2] = hill_slope(y(0));
    Vector dy(2);
    dy(0) = y(1);
    dy(1) = (u - g * m * d1 - y(1) * y(1) * m * d1 * d2) / (m * (1.0 + d1 * d1));
    return dy;
  };
  Transition tr;
  tr.state = s;
  tr.action = a;
  tr.next_state = rk4(deriv, s, spec.param("dt"), static_cast<int>(spec.param("substeps")));
  const double p = tr.next_state(0);
  const double v = tr.next_state(1);
  const double pmax = spec.param("position_bound");
  const double vmax = spec.param("velocity_bound");
  if (p < -pmax || std::abs(v) > vmax) {
    tr.reward = -1.0;
    tr.absorbing = true;
  } else if (p > pmax) {
    tr.reward = 1.0;
    tr.absorbing = true;
  }
  return tr;
}

// ---- Cart-Pole --------------------------------------------------------------

Transition step_cart_pole(const EnvSpec& spec, const Vector& s, const Action& a) {
  const double force = discrete_value(spec, a);
  const double g = spec.param("gravity");
  const double mc = spec.param("cart_mass");
  const double mp = spec.param("pole_mass");
  const double half_len = spec.param("pole_half_length");
  const double total = mc + mp;
  const double pml = mp * half_len;
  auto deriv = [&](const Vector& y) {
    const double th = y(2);
    const double thd = y(3);
    const double c = std::cos(th);
    const double sn = std::sin(th);
    const double temp = (force + pml * thd * thd * sn) / total;
    const double thacc = (g * sn - c * temp) / (half_len * (4.0 / 3.0 - mp * c * c / total));
    const double xacc = temp - pml * thacc * c / total;
    Vector dy(4);
    dy << y(1), xacc, thd, thacc;
    return dy;
  };
  Transition tr;
  tr.state = s;
  tr.action = a;
  tr.next_state = rk4(deriv, s, spec.param("dt"), static_cast<int>(spec.param("substeps")));
  tr.reward = 1.0;
  tr.absorbing = std::abs(tr.next_state(0)) > spec.param("x_threshold") ||
                 std::abs(tr.next_state(2)) > spec.param("theta_threshold");
  return tr;
}

// ---- Acrobot ----------------------------------------------------------------

Transition step_acrobot(const EnvSpec& spec, const Vector& s, const Action& a) {
  const double torque = discrete_value(spec, a);
  const double m1 = spec.param("link_mass_1");
  const double m2 = spec.param("link_mass_2");
  const double l1 = spec.param("link_length_1");
  const double lc1 = spec.param("link_com_1");
  const double lc2 = spec.param("link_com_2");
  const double inertia = spec.param("link_moi");
  const double g = spec.param("gravity");
  auto deriv = [&](const Vector& y) {
    const double th1 = y(0);
    const double th2 = y(1);
    const double dth1 = y(2);
    const double dth2 = y(3);
    const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(th2)) +
                      2.0 * inertia;
    const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(th2)) + inertia;
    const double phi2 = m2 * lc2 * g * std::cos(th1 + th2 - pi / 2.0);
    const double phi1 = -m2 * l1 * lc2 * dth2 * dth2 * std::sin(th2) -
                        2.0 * m2 * l1 * lc2 * dth2 * dth1 * std::sin(th2) +
                        (m1 * lc1 + m2 * l1) * g * std::cos(th1 - pi / 2.0) + phi2;
    const double ddth2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dth1 * dth1 * std::sin(th2) -
                          phi2) /
                         (m2 * lc2 * lc2 + inertia - d2 * d2 / d1);
    const double ddth1 = -(d2 * ddth2 + phi1) / d1;
    Vector dy(4);
    dy << dth1, dth2, ddth1, ddth2;
    return dy;
  };
  Vector inner(4);
  inner << std::atan2(s(1), s(0)), std::atan2(s(3), s(2)), s(4), s(5);
  Vector next = rk4(deriv, inner, spec.param("dt"), static_cast<int>(spec.param("substeps")));
  next(0) = wrap_angle(next(0));
  next(1) = wrap_angle(next(1));
  next(2) = std::clamp(next(2), -spec.param("max_velocity_1"), spec.param("max_velocity_1"));
  next(3) = std::clamp(next(3), -spec.param("max_velocity_2"), spec.param("max_velocity_2"));

  Transition tr;
  tr.state = s;
  tr.action = a;
  tr.next_state.resize(6);
  tr.next_state << std::cos(next(0)), std::sin(next(0)), std::cos(next(1)), std::sin(next(1)),
      next(2), next(3);
  tr.absorbing = -std::cos(next(0)) - std::cos(next(1) + next(0)) > 1.0;
  tr.reward = tr.absorbing ? 0.0 : -1.0;
  return tr;
}

// ---- Mountain-Car -------------------------------------------------------------

Transition step_mountain_car(const EnvSpec& spec, const Vector& s, const Action& a) {
  const double throttle = discrete_value(spec, a);
  const double min_pos = spec.param("min_position");
  const double max_pos = spec.param("max_position");
  const double max_speed = spec.param("max_speed");
  double position = s(0);
  double velocity = s(1);
  velocity += throttle * spec.param("force") + std::cos(3.0 * position) * (-spec.param("gravity"));
  velocity = std::clamp(velocity, -max_speed, max_speed);
  position += velocity;
  position = std::clamp(position, min_pos, max_pos);
  if (position == min_pos && velocity < 0.0) velocity = 0.0;

  Transition tr;
  tr.state = s;
  tr.action = a;
  tr.next_state.resize(2);
  tr.next_state << position, velocity;
  tr.reward = -1.0;
  tr.absorbing = position >= spec.param("goal_position") && velocity >= spec.param("goal_velocity");
  return tr;
}

// ---- Inverted pendulum on a cart ------------------------------------------

Transition step_inverted_pendulum(const EnvSpec& spec, const Vector& s, const Action& a, Rng& rng) {
  const double noise = spec.param("action_noise");
  std::uniform_real_distribution<double> jitter(-noise, noise);
  const double u = discrete_value(spec, a) + jitter(rng);
  const double g = spec.param("gravity");
  const double m = spec.param("pendulum_mass");
  const double l = spec.param("pendulum_length");
  const double alpha = 1.0 / (m + spec.param("cart_mass"));
  auto deriv = [&](const Vector& y) {
    const double th = y(0);
    const double w = y(1);
    Vector dy(2);
    dy(0) = w;
    dy(1) = (g * std::sin(th) - alpha * m * l * w * w * std::sin(2.0 * th) / 2.0 -
             alpha * std::cos(th) * u) /
            (4.0 * l / 3.0 - alpha * m * l * std::cos(th) * std::cos(th));
    return dy;
  };
  Transition tr;
  tr.state = s;
  tr.action = a;
  tr.next_state = rk4(deriv, s, spec.param("dt"), static_cast<int>(spec.param("substeps")));
  tr.next_state(0) = wrap_angle(tr.next_state(0));
  if (std::abs(tr.next_state(0)) > pi / 2.0) {
    tr.reward = -1.0;
    tr.absorbing = true;
  }
  return tr;
}

// ---- Torque pendulum ----------------------------------------------------------

Transition step_torque_pendulum(const EnvSpec& spec, const Vector& s, const Action& a) {
  const Vector act = continuous_value(spec, a);
  const double u = act(0);
  const double g = spec.param("gravity");
  const double m = spec.param("mass");
  const double l = spec.param("length");
  const double max_speed = spec.param("max_speed");
  auto deriv = [&](const Vector& y) {
    Vector dy(2);
    dy(0) = y(1);
    dy(1) = 3.0 * g / (2.0 * l) * std::sin(y(0)) + 3.0 / (m * l * l) * u;
    return dy;
  };
  const double theta = std::atan2(s(1), s(0));
  Vector inner(2);
  inner << theta, s(2);
  Vector next = rk4(deriv, inner, spec.param("dt"), static_cast<int>(spec.param("substeps")));
  next(1) = std::clamp(next(1), -max_speed, max_speed);

  Transition tr;
  tr.state = s;
  tr.action = a;
  tr.next_state.resize(3);
  tr.next_state << std::cos(next(0)), std::sin(next(0)), next(1);
  tr.reward = -(theta * theta + spec.param("velocity_cost") * s(2) * s(2) +
                spec.param("torque_cost") * u * u);
  return tr;
}

// ---- Test MDPs --------------------------------------------------------------------

Transition step_two_state_chain(const EnvSpec& spec, const Vector& s, const Action& a) {
  const double move = discrete_value(spec, a);
  const bool in_one = s(0) > 0.5;
  const bool next_one = move > 0.5 ? !in_one : in_one;
  Transition tr;
  tr.state = s;
  tr.action = a;
  tr.next_state = Vector::Constant(1, next_one ? 1.0 : 0.0);
  tr.reward = next_one ? 1.0 : 0.0;
  return tr;
}

Transition step_one_step_bandit(const EnvSpec& spec, const Vector& s, const Action& a) {
  discrete_value(spec, a);
  Transition tr;
  tr.state = s;
  tr.action = a;
  tr.next_state = s;
  tr.reward = spec.param("reward");
  tr.absorbing = true;
  return tr;
}

}  // namespace

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::car_on_hill: return "car_on_hill";
    case EnvKind::cart_pole: return "cart_pole";
    case EnvKind::acrobot: return "acrobot";
    case EnvKind::mountain_car: return "mountain_car";
    case EnvKind::inverted_pendulum: return "inverted_pendulum";
    case EnvKind::torque_pendulum: return "torque_pendulum";
    case EnvKind::two_state_chain: return "two_state_chain";
    case EnvKind::one_step_bandit: return "one_step_bandit";
  }
  return "car_on_hill";
}

EnvKind env_kind_from_string(std::string_view name) {
  for (EnvKind k : {EnvKind::car_on_hill, EnvKind::cart_pole, EnvKind::acrobot,
                    EnvKind::mountain_car, EnvKind::inverted_pendulum, EnvKind::torque_pendulum,
                    EnvKind::two_state_chain, EnvKind::one_step_bandit}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown environment kind '" + std::string(name) + "'");
}

double EnvSpec::param(std::string_view key) const {
  auto it = parameters.find(std::string(key));
  if (it == parameters.end()) {
    throw ConfigError(name + ": missing dynamics parameter '" + std::string(key) + "'");
  }
  return it->second;
}

Vector env_reset(const EnvSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case EnvKind::car_on_hill: {
      Vector s(2);
      s << spec.param("initial_position"), spec.param("initial_velocity");
      return s;
    }
    case EnvKind::cart_pole: {
      const double r = spec.param("initial_range");
      std::uniform_real_distribution<double> d(-r, r);
      Vector s(4);
      for (Eigen::Index i = 0; i < 4; ++i) s(i) = d(rng);
      return s;
    }
    case EnvKind::acrobot: {
      const double r = spec.param("initial_range");
      std::uniform_real_distribution<double> d(-r, r);
      double raw[4];
      for (double& v : raw) v = d(rng);
      Vector s(6);
      s << std::cos(raw[0]), std::sin(raw[0]), std::cos(raw[1]), std::sin(raw[1]), raw[2], raw[3];
      return s;
    }
    case EnvKind::mountain_car: {
      std::uniform_real_distribution<double> d(spec.param("initial_low"), spec.param("initial_high"));
      Vector s(2);
      s << d(rng), 0.0;
      return s;
    }
    case EnvKind::inverted_pendulum: {
      const double r = spec.param("initial_angle_range");
      std::uniform_real_distribution<double> d(-r, r);
      Vector s(2);
      s << d(rng), 0.0;
      return s;
    }
    case EnvKind::torque_pendulum: {
      std::uniform_real_distribution<double> angle(-pi, pi);
      std::uniform_real_distribution<double> speed(-1.0, 1.0);
      const double th = angle(rng);
      Vector s(3);
      s << std::cos(th), std::sin(th), speed(rng);
      return s;
    }
    case EnvKind::two_state_chain:
      return Vector::Constant(1, spec.param("initial_state"));
    case EnvKind::one_step_bandit:
      return Vector::Zero(1);
  }
  throw ConfigError("unhandled environment kind");
}

Transition env_step(const EnvSpec& spec, const Vector& state, const Action& action, Rng& rng) {
  check_state(spec, state);
  switch (spec.kind) {
    case EnvKind::car_on_hill: return step_car_on_hill(spec, state, action);
    case EnvKind::cart_pole: return step_cart_pole(spec, state, action);
    case EnvKind::acrobot: return step_acrobot(spec, state, action);
    case EnvKind::mountain_car: return step_mountain_car(spec, state, action);
    case EnvKind::inverted_pendulum: return step_inverted_pendulum(spec, state, action, rng);
    case EnvKind::torque_pendulum: return step_torque_pendulum(spec, state, action);
    case EnvKind::two_state_chain: return step_two_state_chain(spec, state, action);
    case EnvKind::one_step_bandit: return step_one_step_bandit(spec, state, action);
  }
  throw ConfigError("unhandled environment kind");
}

Vector scale_state(const EnvSpec& spec, const Vector& state) {
  const Vector span = spec.state_high - spec.state_low;
  return (2.0 * (state - spec.state_low).array() / span.array() - 1.0).matrix();
}

const Vector& Episode::reset(Rng& rng) {
  state_ = env_reset(*spec_, rng);
  steps_ = 0;
  done_ = false;
  started_ = true;
  return state_;
}

Transition Episode::step(const Action& action, Rng& rng) {
  if (done_) throw std::logic_error(spec_->name + ": step on a finished episode");
  Transition tr = env_step(*spec_, state_, action, rng);
  tr.task = task_;
  ++steps_;
  state_ = tr.next_state;
  tr.truncated = !tr.absorbing && steps_ >= spec_->horizon;
  done_ = tr.absorbing || tr.truncated;
  return tr;
}

}  // namespace mtrl::envs
