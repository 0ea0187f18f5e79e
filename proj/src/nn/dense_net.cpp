#include "mtrl/nn/dense_net.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "mtrl/error.hpp"

namespace mtrl::nn {

namespace {

std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

Gradients& Gradients::operator+=(const Gradients& other) {
  if (weight.size() != other.weight.size()) throw ShapeError("gradient layer count mismatch");
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
  return *this;
}

bool Gradients::all_zero() const {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (!weight[i].isZero(0.0) || !bias[i].isZero(0.0)) return false;
  }
  return true;
}

std::vector<std::span<double>> Gradients::blocks() {
  std::vector<std::span<double>> out;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    out.emplace_back(weight[i].data(), static_cast<std::size_t>(weight[i].size()));
    out.emplace_back(bias[i].data(), static_cast<std::size_t>(bias[i].size()));
  }
  return out;
}

std::vector<std::span<const double>> Gradients::blocks() const {
  std::vector<std::span<const double>> out;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    out.emplace_back(weight[i].data(), static_cast<std::size_t>(weight[i].size()));
    out.emplace_back(bias[i].data(), static_cast<std::size_t>(bias[i].size()));
  }
  return out;
}

DenseNet::DenseNet(Eigen::Index input_dim) : input_dim_(input_dim) {
  if (input_dim <= 0) throw ShapeError("input width must be positive");
}

DenseNet::DenseNet(Eigen::Index input_dim, std::span<const LayerSpec> layers, Rng& rng)
    : DenseNet(input_dim) {
  Eigen::Index fan_in = input_dim;
  for (const auto& spec : layers) {
    if (spec.width <= 0) throw ShapeError("layer width must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + spec.width));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Layer layer;
    layer.weight.resize(spec.width, fan_in);
    for (Eigen::Index c = 0; c < fan_in; ++c) {
      for (Eigen::Index r = 0; r < spec.width; ++r) layer.weight(r, c) = dist(rng);
    }
    layer.bias = Vector::Zero(spec.width);
    layer.activation = spec.activation;
    layers_.push_back(std::move(layer));
    fan_in = spec.width;
  }
}

DenseNet::DenseNet(Eigen::Index input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim <= 0) throw ShapeError("input width must be positive");
  check_chain();
}

void DenseNet::check_chain() const {
  Eigen::Index in = input_dim_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weight.cols() != in || l.bias.size() != l.weight.rows()) {
      throw ShapeError("layer " + std::to_string(i) + " has weight " +
                       dims(l.weight.rows(), l.weight.cols()) + " and bias " +
                       std::to_string(l.bias.size()) + ", expected input width " +
                       std::to_string(in));
    }
    in = l.weight.rows();
  }
}

Eigen::Index DenseNet::output_dim() const {
  return layers_.empty() ? input_dim_ : layers_.back().weight.rows();
}

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Vector DenseNet::forward(const Vector& x) const {
  return forward_batch(x);
}

Matrix DenseNet::forward_batch(const Matrix& x) const {
  if (x.rows() != input_dim_) {
    throw ShapeError("input has " + std::to_string(x.rows()) + " rows, network expects " +
                     std::to_string(input_dim_));
  }
  Matrix a = x;
  for (const auto& l : layers_) {
    Matrix z = l.weight * a;
    z.colwise() += l.bias;
    a = activate(l.activation, z);
  }
  return a;
}

ForwardTrace DenseNet::trace(const Matrix& x) const {
  if (x.rows() != input_dim_) {
    throw ShapeError("input has " + std::to_string(x.rows()) + " rows, network expects " +
                     std::to_string(input_dim_));
  }
  ForwardTrace t;
  t.values.reserve(layers_.size() + 1);
  t.values.push_back(x);
  for (const auto& l : layers_) {
    Matrix z = l.weight * t.values.back();
    z.colwise() += l.bias;
    t.values.push_back(activate(l.activation, z));
  }
  return t;
}

Gradients DenseNet::backward(const ForwardTrace& trace, const Matrix& dl_dy) const {
  if (trace.values.size() != layers_.size() + 1) throw ShapeError("trace does not match network");
  const Matrix& y = trace.output();
  if (dl_dy.rows() != y.rows() || dl_dy.cols() != y.cols()) {
    throw ShapeError("output gradient is " + dims(dl_dy.rows(), dl_dy.cols()) + ", output is " +
                     dims(y.rows(), y.cols()));
  }
  Gradients g;
  g.weight.resize(layers_.size());
  g.bias.resize(layers_.size());
  Matrix delta = dl_dy;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& l = layers_[i];
    Matrix dz = delta.cwiseProduct(activation_derivative(l.activation, trace.values[i + 1]));
    g.weight[i].noalias() = dz * trace.values[i].transpose();
    g.bias[i] = dz.rowwise().sum();
    delta.noalias() = l.weight.transpose() * dz;
  }
  g.input = std::move(delta);
  return g;
}

Gradients DenseNet::backward(const Vector& x, const Vector& dl_dy) const {
  return backward(trace(x), dl_dy);
}

Gradients DenseNet::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Vector::Zero(l.bias.size()));
  }
  return g;
}

std::vector<std::span<double>> DenseNet::parameter_blocks() {
  std::vector<std::span<double>> out;
  for (auto& l : layers_) {
    out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return out;
}

std::vector<std::span<const double>> DenseNet::parameter_blocks() const {
  std::vector<std::span<const double>> out;
  for (const auto& l : layers_) {
    out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  return out;
}

std::vector<std::string> DenseNet::block_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    names.push_back("layer " + std::to_string(i) + " weight");
    names.push_back("layer " + std::to_string(i) + " bias");
  }
  return names;
}

bool DenseNet::same_shape(const DenseNet& other) const {
  if (input_dim_ != other.input_dim_ || layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].weight.rows() != other.layers_[i].weight.rows() ||
        layers_[i].weight.cols() != other.layers_[i].weight.cols() ||
        layers_[i].activation != other.layers_[i].activation) {
      return false;
    }
  }
  return true;
}

bool DenseNet::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool DenseNet::operator==(const DenseNet& other) const {
  if (!same_shape(other)) return false;
  // Bitwise comparison: -0.0 and 0.0 differ, NaN equals itself.
  const auto a = parameter_blocks();
  const auto b = other.parameter_blocks();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(a[i].data(), b[i].data(), a[i].size_bytes()) != 0) return false;
  }
  return true;
}

}  // namespace mtrl::nn
