#include <algorithm>
#include <cmath>
#include <cstring>
#include <utility>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "finite_difference.hpp"
#include "mtrl/error.hpp"
#include "mtrl/mtnet/multitask_network.hpp"

using namespace mtrl;
using namespace mtrl::mtnet;
using nn::DenseNet;
using nn::Rng;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

ArchitecturePreset small_preset(PresetName name) {
  const ArchitecturePreset p = make_preset(name);
  return resize_preset(p, p.input_block.empty() ? 0 : 5, std::vector<Eigen::Index>(p.shared.size(), 4));
}

MultiTaskNetwork small_net(PresetName name, std::size_t tasks, Rng& rng, Eigen::Index extra = 0) {
  std::vector<TaskShape> shapes;
  for (std::size_t t = 0; t < tasks; ++t) shapes.push_back({Eigen::Index(2 + t % 2), Eigen::Index(2 + t % 3)});
  if (name == PresetName::mfqi) {
    for (auto& s : shapes) s.input_dim = 2;
  }
  return MultiTaskNetwork(small_preset(name), shapes, extra, rng);
}

bool same_params(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](double x, double y) {
           return std::memcmp(&x, &y, sizeof(double)) == 0;
         });
}

double param_sum(const DenseNet& net) {
  double s = 0.0;
  for (auto b : net.parameter_blocks())
    for (double v : b) s += v;
  return s;
}

}  // namespace

TEST_CASE("presets carry the reference layouts") {
  const auto q = make_preset(PresetName::mdqn_q);
  REQUIRE(q.input_block.size() == 1);
  CHECK(q.input_block[0].width == 80);
  CHECK(q.input_block[0].activation == nn::Activation::relu);
  REQUIRE(q.shared.size() == 2);
  CHECK(q.shared[0].activation == nn::Activation::relu);
  CHECK(q.shared[1].activation == nn::Activation::sigmoid);
  CHECK(q.head_activation == nn::Activation::linear);

  const auto f = make_preset(PresetName::mfqi);
  CHECK(f.input_block.empty());
  REQUIRE(f.shared.size() == 2);
  CHECK(f.shared[0].width == 30);
  CHECK(f.shared[1].activation == nn::Activation::sigmoid);

  const auto actor = make_preset(PresetName::mddpg_actor);
  CHECK(actor.input_block[0].width == 600);
  CHECK(actor.shared[0].width == 500);
  CHECK(actor.head_activation == nn::Activation::tanh);
  const auto critic = make_preset(PresetName::mddpg_critic);
  CHECK(critic.shared[0].activation == nn::Activation::sigmoid);
  CHECK(critic.action_into_trunk);
}

TEST_CASE("mdqn_q preset on the five reference tasks: Cart-Pole head has two outputs") {
  Rng rng(1);
  const std::vector<TaskShape> shapes = {{4, 2}, {6, 3}, {2, 3}, {2, 2}, {2, 3}};
  MultiTaskNetwork net(make_preset(PresetName::mdqn_q), shapes, 0, rng);
  CHECK(net.forward(0, Vector::Zero(4)).size() == 2);
  CHECK(net.forward(1, Vector::Zero(6)).size() == 3);
  CHECK_THROWS_AS(net.forward(5, Vector::Zero(4)), std::out_of_range);
  CHECK_THROWS_AS(net.forward(0, Vector::Zero(6)), ShapeError);
}

TEST_CASE("T = 1 equals the composition of plain networks") {
  Rng rng(2);
  MultiTaskNetwork net = small_net(PresetName::mdqn_q, 1, rng);
  for (int i = 0; i < 100; ++i) {
    const Vector x = random_matrix(2, 1, rng).col(0);
    const Vector direct = net.head(0).forward(net.shared().forward(net.input_block(0).forward(x)));
    CHECK((net.forward(0, x) - direct).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("perturbing one head leaves the other task's output unchanged") {
  Rng rng(3);
  MultiTaskNetwork net = small_net(PresetName::mdqn_q, 3, rng);
  const Matrix x = random_matrix(2, 20, rng);
  const Matrix before = net.forward_batch(0, x);
  for (auto b : net.head(1).parameter_blocks())
    for (double& v : b) v += 0.5;
  CHECK((net.forward_batch(0, x) - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("critic requires the extra input exactly when configured") {
  Rng rng(4);
  const std::vector<TaskShape> shapes = {{3, 1}};
  CHECK_THROWS_AS(MultiTaskNetwork(small_preset(PresetName::mddpg_critic), shapes, 0, rng), ConfigError);
  MultiTaskNetwork critic(small_preset(PresetName::mddpg_critic), shapes, 1, rng);
  CHECK_THROWS_AS(critic.forward(0, Vector::Zero(3)), ShapeError);
  CHECK(critic.forward(0, Vector::Zero(3), Vector::Ones(1)).size() == 1);
}

TEST_CASE("sigmoid trunk output lies in (0,1)^K") {
  Rng rng(5);
  MultiTaskNetwork net = small_net(PresetName::mdqn_q, 2, rng);
  const Matrix x = 50.0 * random_matrix(2, 200, rng);
  const MtTrace tr = net.trace(0, x);
  const Matrix& h = tr.shared.output();
  CHECK(h.minCoeff() >= 0.0);
  CHECK(h.maxCoeff() <= 1.0);
  CHECK(h.colwise().norm().maxCoeff() <= std::sqrt(double(h.rows())));
}

TEST_CASE("backward matches finite differences of the summed per-task loss") {
  for (PresetName p : {PresetName::mfqi, PresetName::mdqn_q, PresetName::mddpg_critic}) {
    CAPTURE(to_string(p));
    Rng rng(6);
    const Eigen::Index extra = p == PresetName::mddpg_critic ? 1 : 0;
    MultiTaskNetwork net = small_net(p, 3, rng, extra);
    // Probe losses: L = sum_t <G_t, y_t(X_t)>.
    std::vector<Matrix> xs, es, gs;
    for (std::size_t t = 0; t < 3; ++t) {
      xs.push_back(random_matrix(net.input_dim(t), 4, rng));
      es.push_back(extra ? random_matrix(extra, 4, rng) : Matrix());
      gs.push_back(random_matrix(net.output_dim(t), 4, rng));
    }
    auto loss = [&] {
      double l = 0.0;
      for (std::size_t t = 0; t < 3; ++t) l += (gs[t].array() * net.forward_batch(t, xs[t], es[t]).array()).sum();
      return l;
    };
    std::vector<MtGradients> grads;
    for (std::size_t t = 0; t < 3; ++t) grads.push_back(net.backward(net.trace(t, xs[t], es[t]), gs[t]));

    double worst = 0.0;
    auto check_blocks = [&](DenseNet& block, const std::vector<const nn::Gradients*>& parts) {
      auto params = block.parameter_blocks();
      for (std::size_t b = 0; b < params.size(); ++b) {
        for (std::size_t i = 0; i < params[b].size(); ++i) {
          double analytic = 0.0;
          for (const auto* g : parts) analytic += g->blocks()[b][i];
          const double fd = testing::central_difference(params[b][i], loss);
          worst = std::max(worst, testing::relative_error(analytic, fd));
        }
      }
    };
    std::vector<const nn::Gradients*> shared_parts;
    for (auto& g : grads) shared_parts.push_back(&g.shared);
    check_blocks(net.shared(), shared_parts);
    for (std::size_t t = 0; t < 3; ++t) {
      check_blocks(net.input_block(t), {&grads[t].input_block});
      check_blocks(net.head(t), {&grads[t].head});
      for (Eigen::Index i = 0; i < xs[t].size(); ++i) {
        const double fd = testing::central_difference(xs[t].data()[i], loss);
        worst = std::max(worst, testing::relative_error(grads[t].input.data()[i], fd));
      }
      for (Eigen::Index i = 0; i < es[t].size(); ++i) {
        const double fd = testing::central_difference(es[t].data()[i], loss);
        worst = std::max(worst, testing::relative_error(grads[t].extra.data()[i], fd));
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("update: mean loss gradient matches finite differences of the objective") {
  Rng rng(7);
  MultiTaskNetwork net = small_net(PresetName::mdqn_q, 2, rng);
  std::vector<RegressionBatch> batch;
  for (std::size_t t = 0; t < 2; ++t) {
    RegressionBatch b;
    b.task = t;
    b.inputs = random_matrix(net.input_dim(t), 6, rng);
    for (int i = 0; i < 6; ++i) b.output_index.push_back(i % net.output_dim(t));
    b.targets = random_matrix(6, 1, rng).col(0);
    batch.push_back(b);
  }
  const nn::LossSpec mse{nn::LossKind::mse};
  auto objective = [&] {
    double l = 0.0;
    for (const auto& b : batch) {
      const Matrix y = net.forward_batch(b.task, b.inputs);
      for (int i = 0; i < 6; ++i) l += nn::loss_eval(mse, y(b.output_index[i], i), b.targets(i)).value;
    }
    return l / 12.0;
  };
  const double before = objective();
  // With lr = 0 the returned value is the objective at the current weights.
  MultiTaskNetwork copy = net;
  CHECK(copy.update(batch, mse, 0.0) == doctest::Approx(before).epsilon(1e-12));
  // A small step must decrease the objective.
  net.update(batch, mse, 1e-4);
  CHECK(objective() < before);
}

TEST_CASE("update rejects unequal per-task batch sizes") {
  Rng rng(8);
  MultiTaskNetwork net = small_net(PresetName::mdqn_q, 2, rng);
  std::vector<RegressionBatch> batch(2);
  for (std::size_t t = 0; t < 2; ++t) {
    const int n = t == 0 ? 3 : 4;
    batch[t].task = t;
    batch[t].inputs = random_matrix(net.input_dim(t), n, rng);
    batch[t].output_index.assign(n, 0);
    batch[t].targets = Vector::Zero(n);
  }
  CHECK_THROWS_AS(net.update(batch, nn::LossSpec{}, 1e-3), ConfigError);
}

TEST_CASE("trunk gradient is additive over per-task sub-batches") {
  Rng rng(9);
  MultiTaskNetwork net = small_net(PresetName::mdqn_q, 3, rng);
  nn::Gradients total = net.shared().zero_gradients();
  nn::Gradients parts = net.shared().zero_gradients();
  for (std::size_t t = 0; t < 3; ++t) {
    const Matrix x = random_matrix(net.input_dim(t), 8, rng);
    const Matrix g = random_matrix(net.output_dim(t), 8, rng);
    total += net.backward(net.trace(t, x, {}), g).shared;
    // Same sub-batch split column by column.
    for (int c = 0; c < 8; ++c) parts += net.backward(net.trace(t, x.col(c), {}), g.col(c)).shared;
  }
  for (std::size_t b = 0; b < total.blocks().size(); ++b) {
    for (std::size_t i = 0; i < total.blocks()[b].size(); ++i) {
      CHECK(std::abs(total.blocks()[b][i] - parts.blocks()[b][i]) < 1e-12);
    }
  }
}

TEST_CASE("task isolation: other tasks' blocks receive zero gradient") {
  Rng rng(10);
  MultiTaskNetwork net = small_net(PresetName::mdqn_q, 3, rng);
  std::vector<RegressionBatch> batch(1);
  batch[0].task = 2;
  batch[0].inputs = random_matrix(net.input_dim(2), 5, rng);
  batch[0].output_index.assign(5, 1);
  batch[0].targets = Vector::Constant(5, 3.0);
  const MultiTaskNetwork before = net;
  net.update(batch, nn::LossSpec{}, 1e-2);
  for (std::size_t t : {0u, 1u}) {
    CHECK(net.input_block(t) == before.input_block(t));
    CHECK(net.head(t) == before.head(t));
    CHECK(net.head_optimizer(t).step == 0);
  }
  CHECK_FALSE(net.head(2) == before.head(2));
  CHECK_FALSE(net.shared() == before.shared());
}

TEST_CASE("frozen trunk is bitwise unchanged by 10 updates and keeps its optimizer step") {
  Rng rng(11);
  MultiTaskNetwork net = small_net(PresetName::mdqn_q, 2, rng);
  net.set_shared_frozen(true);
  const DenseNet trunk = net.shared();
  const MultiTaskNetwork before = net;
  for (int k = 0; k < 10; ++k) {
    std::vector<RegressionBatch> batch(2);
    for (std::size_t t = 0; t < 2; ++t) {
      batch[t].task = t;
      batch[t].inputs = random_matrix(net.input_dim(t), 4, rng);
      batch[t].output_index.assign(4, 0);
      batch[t].targets = Vector::Constant(4, 5.0);
    }
    net.update(batch, nn::LossSpec{nn::LossKind::huber}, 1e-2);
  }
  CHECK(net.shared() == trunk);
  CHECK(net.shared_optimizer().step == 0);
  CHECK_FALSE(net.head(0) == before.head(0));
  CHECK(net.head_optimizer(0).step == 10);
}

TEST_CASE("sync_target") {
  Rng rng(12);
  MultiTaskNetwork src = small_net(PresetName::mdqn_q, 2, rng);
  MultiTaskNetwork dst = small_net(PresetName::mdqn_q, 2, rng);

  SUBCASE("hard sync copies every parameter") {
    sync_target(src, dst, SyncMode::hard());
    auto a = src.parameter_blocks();
    auto b = std::as_const(dst).parameter_blocks();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_params(a[i], b[i]));
  }
  SUBCASE("soft with tau = 1 equals hard") {
    MultiTaskNetwork hard = dst;
    sync_target(src, hard, SyncMode::hard());
    sync_target(src, dst, SyncMode::soft(1.0));
    auto a = std::as_const(hard).parameter_blocks();
    auto b = std::as_const(dst).parameter_blocks();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_params(a[i], b[i]));
  }
  SUBCASE("soft with tau = 0.001 on src = 1, dst = 0 gives 0.001") {
    for (auto b : src.parameter_blocks()) std::fill(b.begin(), b.end(), 1.0);
    for (auto b : dst.parameter_blocks()) std::fill(b.begin(), b.end(), 0.0);
    sync_target(src, dst, SyncMode::soft(0.001));
    for (auto b : std::as_const(dst).parameter_blocks())
      for (double v : b) CHECK(v == doctest::Approx(0.001).epsilon(1e-15));
  }
  SUBCASE("architecture mismatch and bad tau are rejected") {
    MultiTaskNetwork other = small_net(PresetName::mdqn_q, 3, rng);
    CHECK_THROWS(sync_target(src, other, SyncMode::hard()));
    CHECK_THROWS(sync_target(src, dst, SyncMode::soft(1.5)));
  }
}

TEST_CASE("transplant_shared copies the trunk across task counts and leaves heads") {
  Rng rng(13);
  MultiTaskNetwork src = small_net(PresetName::mdqn_q, 5, rng);
  MultiTaskNetwork dst = small_net(PresetName::mdqn_q, 1, rng);
  // Give dst a trunk optimizer history so the reset is observable.
  std::vector<RegressionBatch> batch(1);
  batch[0].task = 0;
  batch[0].inputs = random_matrix(2, 3, rng);
  batch[0].output_index.assign(3, 0);
  batch[0].targets = Vector::Ones(3);
  dst.update(batch, nn::LossSpec{}, 1e-3);
  const DenseNet head = dst.head(0);
  const DenseNet block = dst.input_block(0);
  transplant_shared(src, dst);
  CHECK(dst.shared() == src.shared());
  CHECK(dst.head(0) == head);
  CHECK(dst.input_block(0) == block);
  CHECK(dst.shared_optimizer().step == 0);

  MultiTaskNetwork wrong = small_net(PresetName::mfqi, 1, rng);
  CHECK_THROWS(transplant_shared(src, wrong));
}

TEST_CASE("transplant then frozen training keeps the source trunk") {
  Rng rng(14);
  MultiTaskNetwork src = small_net(PresetName::mdqn_q, 3, rng);
  MultiTaskNetwork dst = small_net(PresetName::mdqn_q, 1, rng);
  transplant_shared(src, dst);
  dst.set_shared_frozen(true);
  for (int k = 0; k < 20; ++k) {
    std::vector<RegressionBatch> batch(1);
    batch[0].task = 0;
    batch[0].inputs = random_matrix(2, 4, rng);
    batch[0].output_index.assign(4, 1);
    batch[0].targets = random_matrix(4, 1, rng).col(0);
    dst.update(batch, nn::LossSpec{}, 1e-2);
  }
  CHECK(dst.shared() == src.shared());
}

TEST_CASE("snapshot round trip and trunk loading across task counts") {
  Rng rng(15);
  MultiTaskNetwork net = small_net(PresetName::mddpg_critic, 3, rng, 1);
  net.set_shared_frozen(true);
  std::stringstream ss;
  write_multitask_network(ss, net);
  const MultiTaskNetwork back = read_multitask_network(ss);
  REQUIRE(back.task_count() == 3);
  CHECK(back.extra_dim() == 1);
  CHECK(back.shared_frozen());
  CHECK(back.shared() == net.shared());
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(back.input_block(t) == net.input_block(t));
    CHECK(back.head(t) == net.head(t));
  }

  const auto path = std::filesystem::temp_directory_path() / "mtrl_test_mtnet_snapshot.txt";
  save_multitask_network(path, net);
  MultiTaskNetwork single = small_net(PresetName::mddpg_critic, 1, rng, 1);
  transplant_shared(load_shared_section(path), single);
  CHECK(single.shared() == net.shared());
  std::filesystem::remove(path);
}

TEST_CASE("weight decay pulls weights toward zero when the loss gradient vanishes") {
  Rng rng(16);
  MultiTaskNetwork net = small_net(PresetName::mdqn_q, 1, rng);
  const double before = param_sum(net.head(0));
  std::vector<GradientBatch> batch(1);
  batch[0].task = 0;
  batch[0].inputs = random_matrix(2, 3, rng);
  batch[0].output_grad = Matrix::Zero(net.output_dim(0), 3);
  net.update_with_gradients(batch, 1e-3, 0.01);
  CHECK(net.head(0).layer(0).bias.isZero(0.0));
  CHECK(param_sum(net.head(0)) != before);
}
