#include "mtrl/envs/tasks.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mtrl/error.hpp"

namespace mtrl::envs {

namespace {

constexpr double pi = std::numbers::pi;

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

std::string fmt_param(double v) {
  std::string s = std::to_string(v);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

EnvSpec make_car_on_hill(double mass, double action_magnitude, double gamma, int horizon) {
  EnvSpec s;
  s.name = "car_on_hill(m=" + fmt_param(mass) + ",a=" + fmt_param(action_magnitude) + ")";
  s.kind = EnvKind::car_on_hill;
  s.state_dim = 2;
  s.actions.values = {-action_magnitude, action_magnitude};
  s.gamma = gamma;
  s.horizon = horizon;
  s.state_low = vec({-1.0, -3.0});
  s.state_high = vec({1.0, 3.0});
  s.parameters = {{"mass", mass},
                  {"gravity", 9.81},
                  {"dt", 0.1},
                  {"substeps", 10},
                  {"position_bound", 1.0},
                  {"velocity_bound", 3.0},
                  {"initial_position", -0.5},
                  {"initial_velocity", 0.0}};
  return s;
}

EnvSpec make_cart_pole(double gamma, int horizon) {
  EnvSpec s;
  s.name = "cart_pole";
  s.kind = EnvKind::cart_pole;
  s.state_dim = 4;
  s.actions.values = {-10.0, 10.0};
  s.gamma = gamma;
  s.horizon = horizon;
  const double theta_threshold = 12.0 * 2.0 * pi / 360.0;
  s.state_low = vec({-2.4, -3.0, -theta_threshold, -3.5});
  s.state_high = vec({2.4, 3.0, theta_threshold, 3.5});
  s.parameters = {{"gravity", 9.8},          {"cart_mass", 1.0},
                  {"pole_mass", 0.1},        {"pole_half_length", 0.5},
                  {"dt", 0.02},              {"substeps", 1},
                  {"x_threshold", 2.4},      {"theta_threshold", theta_threshold},
                  {"initial_range", 0.05}};
  return s;
}

EnvSpec make_acrobot(double gamma, int horizon) {
  EnvSpec s;
  s.name = "acrobot";
  s.kind = EnvKind::acrobot;
  s.state_dim = 6;
  s.actions.values = {-1.0, 0.0, 1.0};
  s.gamma = gamma;
  s.horizon = horizon;
  s.state_low = vec({-1.0, -1.0, -1.0, -1.0, -4.0 * pi, -9.0 * pi});
  s.state_high = vec({1.0, 1.0, 1.0, 1.0, 4.0 * pi, 9.0 * pi});
  s.parameters = {{"link_length_1", 1.0},       {"link_mass_1", 1.0},
                  {"link_mass_2", 1.0},         {"link_com_1", 0.5},
                  {"link_com_2", 0.5},          {"link_moi", 1.0},
                  {"gravity", 9.8},             {"dt", 0.2},
                  {"substeps", 1},              {"max_velocity_1", 4.0 * pi},
                  {"max_velocity_2", 9.0 * pi}, {"initial_range", 0.1}};
  return s;
}

EnvSpec make_mountain_car(double gamma, int horizon) {
  EnvSpec s;
  s.name = "mountain_car";
  s.kind = EnvKind::mountain_car;
  s.state_dim = 2;
  s.actions.values = {-1.0, 0.0, 1.0};
  s.gamma = gamma;
  s.horizon = horizon;
  s.state_low = vec({-1.2, -0.07});
  s.state_high = vec({0.6, 0.07});
  s.parameters = {{"min_position", -1.2}, {"max_position", 0.6},  {"max_speed", 0.07},
                  {"goal_position", 0.5}, {"goal_velocity", 0.0}, {"force", 0.001},
                  {"gravity", 0.0025},    {"initial_low", -0.6},  {"initial_high", -0.4}};
  return s;
}

EnvSpec make_inverted_pendulum(double gamma, int horizon) {
  EnvSpec s;
  s.name = "inverted_pendulum";
  s.kind = EnvKind::inverted_pendulum;
  s.state_dim = 2;
  s.actions.values = {-50.0, 0.0, 50.0};
  s.gamma = gamma;
  s.horizon = horizon;
  s.state_low = vec({-pi / 2.0, -6.0});
  s.state_high = vec({pi / 2.0, 6.0});
  s.deterministic = false;
  s.parameters = {{"gravity", 9.8},       {"pendulum_mass", 2.0},
                  {"cart_mass", 8.0},     {"pendulum_length", 0.5},
                  {"action_noise", 10.0}, {"dt", 0.1},
                  {"substeps", 10},       {"initial_angle_range", pi / 8.0}};
  return s;
}

EnvSpec make_torque_pendulum(double mass, double gamma, int horizon) {
  EnvSpec s;
  s.name = "torque_pendulum(m=" + fmt_param(mass) + ")";
  s.kind = EnvKind::torque_pendulum;
  s.state_dim = 3;
  s.actions.low = vec({-2.0});
  s.actions.high = vec({2.0});
  s.gamma = gamma;
  s.horizon = horizon;
  s.state_low = vec({-1.0, -1.0, -8.0});
  s.state_high = vec({1.0, 1.0, 8.0});
  s.parameters = {{"mass", mass},       {"length", 1.0},        {"gravity", 10.0},
                  {"max_speed", 8.0},   {"dt", 0.05},           {"substeps", 5},
                  {"velocity_cost", 0.1}, {"torque_cost", 0.001}};
  return s;
}

EnvSpec make_two_state_chain(double gamma, int horizon) {
  EnvSpec s;
  s.name = "two_state_chain";
  s.kind = EnvKind::two_state_chain;
  s.state_dim = 1;
  s.actions.values = {0.0, 1.0};
  s.gamma = gamma;
  s.horizon = horizon;
  s.state_low = vec({0.0});
  s.state_high = vec({1.0});
  s.parameters = {{"initial_state", 0.0}};
  return s;
}

EnvSpec make_one_step_bandit(double reward) {
  EnvSpec s;
  s.name = "one_step_bandit";
  s.kind = EnvKind::one_step_bandit;
  s.state_dim = 1;
  s.actions.values = {0.0};
  s.gamma = 1.0;
  s.horizon = 1;
  s.state_low = vec({-1.0});
  s.state_high = vec({1.0});
  s.parameters = {{"reward", reward}};
  return s;
}

std::vector<EnvSpec> make_task_suite(std::string_view name) {
  if (name == "car_on_hill_8") {
    // (mass, action magnitude) per task, in reference order.
    const double table[8][2] = {{1.0, 4.0},   {0.8, 4.0},  {1.0, 4.5},   {1.2, 4.5},
                                {1.0, 4.125}, {1.0, 4.25}, {0.8, 4.375}, {0.85, 4.0}};
    std::vector<EnvSpec> suite;
    for (const auto& row : table) suite.push_back(make_car_on_hill(row[0], row[1], 0.95, 100));
    return suite;
  }
  if (name == "mdqn_5") {
    return {make_cart_pole(0.99, 500), make_acrobot(0.99, 1000), make_mountain_car(0.99, 1000),
            make_car_on_hill(1.0, 4.0, 0.95, 100), make_inverted_pendulum(0.95, 3000)};
  }
  if (name == "pendulum_family_3") {
    return {make_torque_pendulum(0.8), make_torque_pendulum(1.0), make_torque_pendulum(1.2)};
  }
  throw ConfigError("unknown task suite '" + std::string(name) + "'");
}

double pendulum_energy(const EnvSpec& spec, const Vector& state) {
  const double m = spec.param("mass");
  const double l = spec.param("length");
  const double g = spec.param("gravity");
  const double theta = std::atan2(state(1), state(0));
  const double w = state(2);
  // Uniform rod pivoting at one end: I = m l^2 / 3, centre of mass at l / 2.
  return 0.5 * (m * l * l / 3.0) * w * w + m * g * 0.5 * l * std::cos(theta);
}

}  // namespace mtrl::envs
