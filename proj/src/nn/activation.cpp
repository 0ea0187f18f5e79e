#include "mtrl/nn/activation.hpp"

#include <string>

#include "mtrl/error.hpp"

namespace mtrl::nn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
  }
  return "linear";
}

Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "linear") return Activation::linear;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::sigmoid: return (1.0 + (-z.array()).exp()).inverse().matrix();
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::linear: return z;
  }
  return z;
}

Eigen::MatrixXd activation_derivative(Activation a, const Eigen::MatrixXd& y) {
  switch (a) {
    case Activation::relu: return (y.array() > 0.0).cast<double>().matrix();
    case Activation::sigmoid: return (y.array() * (1.0 - y.array())).matrix();
    case Activation::tanh: return (1.0 - y.array().square()).matrix();
    case Activation::linear: return Eigen::MatrixXd::Ones(y.rows(), y.cols());
  }
  return Eigen::MatrixXd::Ones(y.rows(), y.cols());
}

}  // namespace mtrl::nn
