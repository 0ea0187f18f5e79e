#pragma once

#include <string_view>
#include <vector>

#include "mtrl/envs/env.hpp"

namespace mtrl::envs {

// Car-On-Hill (Ernst et al. 2005): state (position, velocity), reward -1 on
// leaving the box, +1 on reaching the hilltop, 0 otherwise.
EnvSpec make_car_on_hill(double mass = 1.0, double action_magnitude = 4.0, double gamma = 0.95,
                         int horizon = 100);
// Gym CartPole-v0/v1 constants; force +-10 N; +1 per step until failure.
EnvSpec make_cart_pole(double gamma = 0.99, int horizon = 500);
// Gym Acrobot-v1 ("book" dynamics); observation (cos1, sin1, cos2, sin2, w1, w2).
EnvSpec make_acrobot(double gamma = 0.99, int horizon = 1000);
// Gym MountainCar-v0; throttle in {-1, 0, +1}.
EnvSpec make_mountain_car(double gamma = 0.99, int horizon = 1000);
// Pendulum on a cart (Lagoudakis & Parr 2003), forces {-50, 0, 50} N plus
// uniform noise in [-10, 10] N.
EnvSpec make_inverted_pendulum(double gamma = 0.95, int horizon = 3000);
// Torque-limited swing-up pendulum (Gym Pendulum-v1 dynamics with variable
// mass); continuous action in [-2, 2].
EnvSpec make_torque_pendulum(double mass = 1.0, double gamma = 0.99, int horizon = 200);
// Two states {0, 1}; action 0 stays, action 1 switches; reward 1 on landing in state 1.
EnvSpec make_two_state_chain(double gamma = 0.9, int horizon = 100);
// Single absorbing step with a fixed reward.
EnvSpec make_one_step_bandit(double reward = 1.0);

// Suites in reference order: car_on_hill_8, mdqn_5, pendulum_family_3.
std::vector<EnvSpec> make_task_suite(std::string_view name);

// Total mechanical energy of the torque pendulum at `state` (unactuated rod).
double pendulum_energy(const EnvSpec& spec, const Vector& state);

}  // namespace mtrl::envs
