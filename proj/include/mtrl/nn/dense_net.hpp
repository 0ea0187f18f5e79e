#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtrl/nn/activation.hpp"

namespace mtrl::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::linear;
};

struct LayerSpec {
  Eigen::Index width = 0;
  Activation activation = Activation::linear;
};

// Parameter-shaped gradient container. `input` holds dL/dx for the batch that
// produced it (one column per sample).
struct Gradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;
  Matrix input;

  Gradients& operator+=(const Gradients& other);
  bool all_zero() const;
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
};

// Activations of every layer for one batch, kept for the backward pass.
// values[0] is the input, values[i+1] the output of layer i.
struct ForwardTrace {
  std::vector<Matrix> values;
  const Matrix& output() const { return values.back(); }
};

// Fully connected feed-forward network. A network with zero layers is the
// identity map on its input width; multi-task input blocks use that form when
// a task has no private input layers.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(Eigen::Index input_dim);
  // Glorot-uniform weights, zero biases.
  DenseNet(Eigen::Index input_dim, std::span<const LayerSpec> layers, Rng& rng);
  // Takes ownership of explicit layers; throws ShapeError if they do not chain.
  DenseNet(Eigen::Index input_dim, std::vector<Layer> layers);

  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Index output_dim() const;
  std::size_t layer_count() const { return layers_.size(); }
  std::size_t parameter_count() const;

  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  Layer& layer(std::size_t i) { return layers_.at(i); }
  const std::vector<Layer>& layers() const { return layers_; }

  Vector forward(const Vector& x) const;
  // One sample per column.
  Matrix forward_batch(const Matrix& x) const;
  ForwardTrace trace(const Matrix& x) const;

  // Reverse-mode gradients of a scalar L given dL/dy for every column of the
  // traced batch. Parameter gradients are summed over the batch.
  Gradients backward(const ForwardTrace& trace, const Matrix& dl_dy) const;
  Gradients backward(const Vector& x, const Vector& dl_dy) const;

  Gradients zero_gradients() const;

  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::span<const double>> parameter_blocks() const;
  std::vector<std::string> block_names() const;

  bool same_shape(const DenseNet& other) const;
  bool all_finite() const;
  bool operator==(const DenseNet& other) const;

 private:
  void check_chain() const;

  Eigen::Index input_dim_ = 0;
  std::vector<Layer> layers_;
};

}  // namespace mtrl::nn
