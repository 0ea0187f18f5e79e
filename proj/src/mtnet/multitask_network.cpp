#include "mtrl/mtnet/multitask_network.hpp"

#include <algorithm>
#include <string>

#include "mtrl/error.hpp"

namespace mtrl::mtnet {

namespace {

std::vector<nn::LayerSpec> head_layout(const ArchitecturePreset& preset, Eigen::Index width) {
  return {nn::LayerSpec{width, preset.head_activation}};
}

}  // namespace

MultiTaskNetwork::MultiTaskNetwork(const ArchitecturePreset& preset,
                                   std::span<const TaskShape> tasks, Eigen::Index extra_dim,
                                   nn::Rng& rng)
    : extra_dim_(extra_dim) {
  if (tasks.empty()) throw ConfigError("a multi-task network needs at least one task");
  if (preset.action_into_trunk != (extra_dim > 0)) {
    throw ConfigError("preset " + std::string(to_string(preset.name)) +
                      (preset.action_into_trunk ? " requires" : " does not accept") +
                      " an extra trunk input");
  }
  // Sections are initialized in a fixed order (inputs, trunk, heads) so that
  // a given rng state always produces the same network.
  for (const auto& t : tasks) input_blocks_.emplace_back(t.input_dim, preset.input_block, rng);
  const Eigen::Index features = input_blocks_.front().output_dim();
  for (std::size_t t = 0; t < input_blocks_.size(); ++t) {
    if (input_blocks_[t].output_dim() != features) {
      throw ShapeError("task " + std::to_string(t) + " input block emits " +
                       std::to_string(input_blocks_[t].output_dim()) + " features, expected " +
                       std::to_string(features));
    }
  }
  shared_ = nn::DenseNet(features + extra_dim, preset.shared, rng);
  for (const auto& t : tasks) {
    heads_.emplace_back(shared_.output_dim(), head_layout(preset, t.output_dim), rng);
  }
  reset_optimizer();
}

MultiTaskNetwork::MultiTaskNetwork(std::vector<nn::DenseNet> input_blocks, nn::DenseNet shared,
                                   std::vector<nn::DenseNet> heads, Eigen::Index extra_dim)
    : input_blocks_(std::move(input_blocks)),
      shared_(std::move(shared)),
      heads_(std::move(heads)),
      extra_dim_(extra_dim) {
  if (heads_.empty() || heads_.size() != input_blocks_.size()) {
    throw ShapeError("need one input block and one head per task");
  }
  for (std::size_t t = 0; t < heads_.size(); ++t) {
    if (input_blocks_[t].output_dim() + extra_dim_ != shared_.input_dim()) {
      throw ShapeError("task " + std::to_string(t) + " input block width " +
                       std::to_string(input_blocks_[t].output_dim()) +
                       " does not feed trunk input " + std::to_string(shared_.input_dim()));
    }
    if (heads_[t].input_dim() != shared_.output_dim()) {
      throw ShapeError("task " + std::to_string(t) + " head expects " +
                       std::to_string(heads_[t].input_dim()) + " features, trunk emits " +
                       std::to_string(shared_.output_dim()));
    }
  }
  reset_optimizer();
}

void MultiTaskNetwork::check_task(std::size_t task) const {
  if (task >= heads_.size()) {
    throw std::out_of_range("unknown task id " + std::to_string(task) + " (network has " +
                            std::to_string(heads_.size()) + " tasks)");
  }
}

Eigen::Index MultiTaskNetwork::input_dim(std::size_t task) const {
  check_task(task);
  return input_blocks_[task].input_dim();
}

Eigen::Index MultiTaskNetwork::output_dim(std::size_t task) const {
  check_task(task);
  return heads_[task].output_dim();
}

const nn::DenseNet& MultiTaskNetwork::input_block(std::size_t task) const {
  check_task(task);
  return input_blocks_[task];
}
nn::DenseNet& MultiTaskNetwork::input_block(std::size_t task) {
  check_task(task);
  return input_blocks_[task];
}
const nn::DenseNet& MultiTaskNetwork::head(std::size_t task) const {
  check_task(task);
  return heads_[task];
}
nn::DenseNet& MultiTaskNetwork::head(std::size_t task) {
  check_task(task);
  return heads_[task];
}

Matrix MultiTaskNetwork::trunk_input(const Matrix& features, const Matrix& extra) const {
  if (extra_dim_ == 0) {
    if (extra.size() != 0) throw ShapeError("this network takes no extra trunk input");
    return features;
  }
  if (extra.rows() != extra_dim_ || extra.cols() != features.cols()) {
    throw ShapeError("extra trunk input must be " + std::to_string(extra_dim_) + "x" +
                     std::to_string(features.cols()) + ", got " + std::to_string(extra.rows()) +
                     "x" + std::to_string(extra.cols()));
  }
  Matrix stacked(features.rows() + extra_dim_, features.cols());
  stacked.topRows(features.rows()) = features;
  stacked.bottomRows(extra_dim_) = extra;
  return stacked;
}

Vector MultiTaskNetwork::forward(std::size_t task, const Vector& x, const Vector& extra) const {
  if (extra.size() == 0) return forward_batch(task, x);
  return forward_batch(task, x, extra);
}

Matrix MultiTaskNetwork::forward_batch(std::size_t task, const Matrix& x,
                                       const Matrix& extra) const {
  check_task(task);
  const Matrix features = input_blocks_[task].forward_batch(x);
  return heads_[task].forward_batch(shared_.forward_batch(trunk_input(features, extra)));
}

MtTrace MultiTaskNetwork::trace(std::size_t task, const Matrix& x, const Matrix& extra) const {
  check_task(task);
  MtTrace t;
  t.task = task;
  t.input_block = input_blocks_[task].trace(x);
  t.shared = shared_.trace(trunk_input(t.input_block.output(), extra));
  t.head = heads_[task].trace(t.shared.output());
  return t;
}

MtGradients MultiTaskNetwork::backward(const MtTrace& trace, const Matrix& dl_dy) const {
  check_task(trace.task);
  MtGradients g;
  g.task = trace.task;
  g.head = heads_[trace.task].backward(trace.head, dl_dy);
  g.shared = shared_.backward(trace.shared, g.head.input);
  const Eigen::Index features = input_blocks_[trace.task].output_dim();
  Matrix feature_grad = g.shared.input.topRows(features);
  if (extra_dim_ > 0) g.extra = g.shared.input.bottomRows(extra_dim_);
  g.input_block = input_blocks_[trace.task].backward(trace.input_block, feature_grad);
  g.input = g.input_block.input;
  return g;
}

void MultiTaskNetwork::apply_gradients(std::span<const MtGradients> grads, double lr,
                                       double weight_decay) {
  if (grads.empty()) return;
  std::vector<const MtGradients*> by_task(task_count(), nullptr);
  for (const auto& g : grads) {
    check_task(g.task);
    if (by_task[g.task]) throw ConfigError("task " + std::to_string(g.task) + " appears twice");
    by_task[g.task] = &g;
  }
  // Validate everything before the first parameter changes.
  nn::Gradients shared_sum = shared_.zero_gradients();
  for (const auto& g : grads) shared_sum += g.shared;

  for (std::size_t t = 0; t < task_count(); ++t) {
    if (!by_task[t]) continue;
    nn::Gradients in = by_task[t]->input_block;
    nn::add_weight_decay(in, input_blocks_[t], weight_decay);
    nn::adam_step(input_blocks_[t], in, input_opt_[t], lr, "input_block[" + std::to_string(t) + "]");
  }
  if (!shared_frozen_) {
    nn::add_weight_decay(shared_sum, shared_, weight_decay);
    nn::adam_step(shared_, shared_sum, shared_opt_, lr, "shared");
  }
  for (std::size_t t = 0; t < task_count(); ++t) {
    if (!by_task[t]) continue;
    nn::Gradients hd = by_task[t]->head;
    nn::add_weight_decay(hd, heads_[t], weight_decay);
    nn::adam_step(heads_[t], hd, head_opt_[t], lr, "head[" + std::to_string(t) + "]");
  }
}

double MultiTaskNetwork::update(std::span<const RegressionBatch> batch, const nn::LossSpec& loss,
                                double lr, double weight_decay) {
  if (batch.empty()) return 0.0;
  const Eigen::Index per_task = batch.front().inputs.cols();
  Eigen::Index total = 0;
  for (const auto& b : batch) {
    if (b.inputs.cols() != per_task) {
      throw ConfigError("every task must contribute the same number of samples (task " +
                        std::to_string(b.task) + " has " + std::to_string(b.inputs.cols()) +
                        ", expected " + std::to_string(per_task) + ")");
    }
    if (b.targets.size() != per_task ||
        static_cast<Eigen::Index>(b.output_index.size()) != per_task) {
      throw ShapeError("targets/output indices do not match sample count");
    }
    total += per_task;
  }
  if (total == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(total);

  double loss_sum = 0.0;
  std::vector<MtGradients> grads;
  grads.reserve(batch.size());
  for (const auto& b : batch) {
    MtTrace tr = trace(b.task, b.inputs, b.extra);
    const Matrix& y = tr.output();
    Matrix dl_dy = Matrix::Zero(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < per_task; ++i) {
      const Eigen::Index row = b.output_index[static_cast<std::size_t>(i)];
      if (row < 0 || row >= y.rows()) throw ShapeError("output index out of range");
      const auto lv = nn::loss_eval(loss, y(row, i), b.targets(i));
      loss_sum += lv.value;
      dl_dy(row, i) = lv.derivative * scale;
    }
    grads.push_back(backward(tr, dl_dy));
  }
  apply_gradients(grads, lr, weight_decay);
  return loss_sum * scale;
}

void MultiTaskNetwork::update_with_gradients(std::span<const GradientBatch> batch, double lr,
                                             double weight_decay) {
  std::vector<MtGradients> grads;
  grads.reserve(batch.size());
  for (const auto& b : batch) grads.push_back(backward(trace(b.task, b.inputs, b.extra), b.output_grad));
  apply_gradients(grads, lr, weight_decay);
}

void MultiTaskNetwork::reset_optimizer() {
  input_opt_.clear();
  head_opt_.clear();
  for (const auto& n : input_blocks_) input_opt_.emplace_back(n);
  for (const auto& n : heads_) head_opt_.emplace_back(n);
  reset_shared_optimizer();
}

void MultiTaskNetwork::reset_shared_optimizer() { shared_opt_ = nn::AdamState(shared_); }

bool MultiTaskNetwork::same_architecture(const MultiTaskNetwork& other) const {
  if (task_count() != other.task_count() || extra_dim_ != other.extra_dim_) return false;
  if (!shared_.same_shape(other.shared_)) return false;
  for (std::size_t t = 0; t < task_count(); ++t) {
    if (!input_blocks_[t].same_shape(other.input_blocks_[t]) ||
        !heads_[t].same_shape(other.heads_[t])) {
      return false;
    }
  }
  return true;
}

bool MultiTaskNetwork::all_finite() const {
  if (!shared_.all_finite()) return false;
  for (std::size_t t = 0; t < task_count(); ++t) {
    if (!input_blocks_[t].all_finite() || !heads_[t].all_finite()) return false;
  }
  return true;
}

std::vector<std::span<double>> MultiTaskNetwork::parameter_blocks() {
  std::vector<std::span<double>> out;
  for (auto& n : input_blocks_) {
    auto b = n.parameter_blocks();
    out.insert(out.end(), b.begin(), b.end());
  }
  auto s = shared_.parameter_blocks();
  out.insert(out.end(), s.begin(), s.end());
  for (auto& n : heads_) {
    auto b = n.parameter_blocks();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<std::span<const double>> MultiTaskNetwork::parameter_blocks() const {
  std::vector<std::span<const double>> out;
  for (const auto& n : input_blocks_) {
    auto b = n.parameter_blocks();
    out.insert(out.end(), b.begin(), b.end());
  }
  auto s = shared_.parameter_blocks();
  out.insert(out.end(), s.begin(), s.end());
  for (const auto& n : heads_) {
    auto b = n.parameter_blocks();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

void sync_target(const MultiTaskNetwork& src, MultiTaskNetwork& dst, SyncMode mode) {
  if (!src.same_architecture(dst)) throw ShapeError("target sync between different architectures");
  if (!(mode.tau >= 0.0 && mode.tau <= 1.0)) throw ConfigError("sync tau must lie in [0, 1]");
  const auto from = src.parameter_blocks();
  auto to = dst.parameter_blocks();
  for (std::size_t b = 0; b < from.size(); ++b) {
    if (mode.tau == 1.0) {
      std::copy(from[b].begin(), from[b].end(), to[b].begin());
    } else {
      for (std::size_t i = 0; i < from[b].size(); ++i) {
        to[b][i] = mode.tau * from[b][i] + (1.0 - mode.tau) * to[b][i];
      }
    }
  }
}

void transplant_shared(const nn::DenseNet& trunk, MultiTaskNetwork& dst) {
  if (!trunk.same_shape(dst.shared())) {
    throw ShapeError("trunk shapes differ: cannot transplant shared layers");
  }
  dst.shared() = trunk;
  dst.reset_shared_optimizer();
}

void transplant_shared(const MultiTaskNetwork& src, MultiTaskNetwork& dst) {
  transplant_shared(src.shared(), dst);
}

}  // namespace mtrl::mtnet
