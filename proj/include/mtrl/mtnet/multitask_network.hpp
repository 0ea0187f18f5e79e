#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "mtrl/mtnet/preset.hpp"
#include "mtrl/nn/adam.hpp"
#include "mtrl/nn/dense_net.hpp"
#include "mtrl/nn/loss.hpp"

namespace mtrl::mtnet {

using nn::Matrix;
using nn::Vector;

struct TaskShape {
  Eigen::Index input_dim = 0;
  Eigen::Index output_dim = 0;
};

// Samples of one task inside a multi-task regression batch. The loss applies
// to output row `output_index[i]` of sample column i.
struct RegressionBatch {
  std::size_t task = 0;
  Matrix inputs;  // input_dim x n
  Matrix extra;   // extra_dim x n, empty unless the trunk takes extra input
  std::vector<Eigen::Index> output_index;
  Vector targets;
};

// Samples of one task with an externally supplied output gradient dL/dy.
struct GradientBatch {
  std::size_t task = 0;
  Matrix inputs;
  Matrix extra;
  Matrix output_grad;  // output_dim x n
};

struct MtTrace {
  std::size_t task = 0;
  nn::ForwardTrace input_block;
  nn::ForwardTrace shared;
  nn::ForwardTrace head;
  const Matrix& output() const { return head.output(); }
};

struct MtGradients {
  std::size_t task = 0;
  nn::Gradients input_block;
  nn::Gradients shared;
  nn::Gradients head;
  Matrix input;  // dL/dx
  Matrix extra;  // dL/d(extra), empty when the trunk takes no extra input
};

struct SyncMode {
  // tau == 1 is a hard copy.
  double tau = 1.0;
  static SyncMode hard() { return {1.0}; }
  static SyncMode soft(double tau) { return {tau}; }
};

// Per-task input blocks w_t, one shared trunk h and per-task heads f_t:
// y_t = f_t(h([w_t(x), extra])). Each section carries its own Adam state.
class MultiTaskNetwork {
 public:
  MultiTaskNetwork(const ArchitecturePreset& preset, std::span<const TaskShape> tasks,
                   Eigen::Index extra_dim, nn::Rng& rng);
  MultiTaskNetwork(std::vector<nn::DenseNet> input_blocks, nn::DenseNet shared,
                   std::vector<nn::DenseNet> heads, Eigen::Index extra_dim = 0);

  std::size_t task_count() const { return heads_.size(); }
  Eigen::Index extra_dim() const { return extra_dim_; }
  Eigen::Index input_dim(std::size_t task) const;
  Eigen::Index output_dim(std::size_t task) const;

  const nn::DenseNet& input_block(std::size_t task) const;
  nn::DenseNet& input_block(std::size_t task);
  const nn::DenseNet& shared() const { return shared_; }
  nn::DenseNet& shared() { return shared_; }
  const nn::DenseNet& head(std::size_t task) const;
  nn::DenseNet& head(std::size_t task);

  bool shared_frozen() const { return shared_frozen_; }
  void set_shared_frozen(bool frozen) { shared_frozen_ = frozen; }

  Vector forward(std::size_t task, const Vector& x, const Vector& extra = {}) const;
  Matrix forward_batch(std::size_t task, const Matrix& x, const Matrix& extra = {}) const;
  MtTrace trace(std::size_t task, const Matrix& x, const Matrix& extra = {}) const;
  MtGradients backward(const MtTrace& trace, const Matrix& dl_dy) const;

  // Sums trunk gradients over all entries, then takes one Adam step on every
  // block that received a gradient. The trunk is skipped while frozen;
  // blocks of tasks absent from `grads` are not touched.
  void apply_gradients(std::span<const MtGradients> grads, double lr, double weight_decay = 0.0);

  // One step on the mean loss over all samples (1/(nT) normalization).
  // Throws ConfigError if tasks contribute different sample counts.
  double update(std::span<const RegressionBatch> batch, const nn::LossSpec& loss, double lr,
                double weight_decay = 0.0);
  void update_with_gradients(std::span<const GradientBatch> batch, double lr,
                             double weight_decay = 0.0);

  // Fresh optimizer state for every section.
  void reset_optimizer();
  void reset_shared_optimizer();
  const nn::AdamState& shared_optimizer() const { return shared_opt_; }
  const nn::AdamState& input_optimizer(std::size_t task) const { return input_opt_.at(task); }
  const nn::AdamState& head_optimizer(std::size_t task) const { return head_opt_.at(task); }

  bool same_architecture(const MultiTaskNetwork& other) const;
  bool all_finite() const;
  // Parameters in section order: input blocks, shared, heads.
  std::vector<std::span<double>> parameter_blocks();
  std::vector<std::span<const double>> parameter_blocks() const;

 private:
  void check_task(std::size_t task) const;
  Matrix trunk_input(const Matrix& features, const Matrix& extra) const;

  std::vector<nn::DenseNet> input_blocks_;
  nn::DenseNet shared_;
  std::vector<nn::DenseNet> heads_;
  Eigen::Index extra_dim_ = 0;
  bool shared_frozen_ = false;
  std::vector<nn::AdamState> input_opt_;
  nn::AdamState shared_opt_;
  std::vector<nn::AdamState> head_opt_;
};

// dst := src (tau = 1) or dst := tau * src + (1 - tau) * dst.
void sync_target(const MultiTaskNetwork& src, MultiTaskNetwork& dst, SyncMode mode);

// Copies the trunk only and resets dst's trunk optimizer. Task counts may differ.
void transplant_shared(const MultiTaskNetwork& src, MultiTaskNetwork& dst);
void transplant_shared(const nn::DenseNet& trunk, MultiTaskNetwork& dst);

// Snapshot with section tags (input_block t, shared, head t); see snapshot.cpp.
void write_multitask_network(std::ostream& os, const MultiTaskNetwork& net);
MultiTaskNetwork read_multitask_network(std::istream& is);
void save_multitask_network(const std::filesystem::path& path, const MultiTaskNetwork& net);
MultiTaskNetwork load_multitask_network(const std::filesystem::path& path);
nn::DenseNet load_shared_section(const std::filesystem::path& path);

}  // namespace mtrl::mtnet
