#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace mtrl::nn {

enum class Activation { relu, sigmoid, tanh, linear };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

// Elementwise activation of pre-activations `z`.
Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z);

// Derivative of the activation expressed through its output `y = act(z)`.
// All four supported activations admit this form.
Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& y);

}  // namespace mtrl::nn
