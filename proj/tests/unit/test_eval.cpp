#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mtrl/error.hpp"
#include "mtrl/envs/tasks.hpp"
#include "mtrl/eval/curves.hpp"
#include "mtrl/eval/evaluate.hpp"
#include "mtrl/eval/oracle.hpp"

using namespace mtrl;
using namespace mtrl::eval;
using envs::Action;

namespace {

LearningCurve curve(std::uint64_t seed, std::vector<double> per_epoch, std::string hash = "h") {
  LearningCurve c;
  c.algorithm = "mdqn";
  c.suite = "mdqn_5";
  c.tasks = {"a"};
  c.seed = seed;
  c.config_hash = std::move(hash);
  for (std::size_t e = 0; e < per_epoch.size(); ++e) c.records.push_back({int(e), {per_epoch[e]}, {}});
  return c;
}

}  // namespace

TEST_CASE("evaluate_greedy on trivial tasks") {
  envs::Rng rng(1);
  const Policy first = [](const Vector&) { return Action::discrete(0); };
  SUBCASE("reward-free: all returns 0") {
    const auto r = evaluate_greedy(first, envs::make_one_step_bandit(0.0), 50, rng);
    CHECK(r.returns.size() == 50);
    for (double x : r.returns) CHECK(x == 0.0);
  }
  SUBCASE("single-step absorbing with reward 1") {
    const auto r = evaluate_greedy(first, envs::make_one_step_bandit(1.0), 10, rng);
    CHECK(r.returns.size() == 10);
    CHECK(r.mean() == 1.0);
  }
  SUBCASE("unfinished final episode is dropped") {
    // Horizon 4, budget 10: two full episodes, two dropped steps.
    const auto r = evaluate_greedy(first, envs::make_two_state_chain(0.9, 4), 10, rng);
    CHECK(r.returns.size() == 2);
    CHECK_FALSE(r.partial_only);
    CHECK(r.steps == 10);
  }
  SUBCASE("budget shorter than any episode keeps the single partial episode, flagged") {
    const Policy flip = [](const Vector&) { return Action::discrete(1); };
    const auto r = evaluate_greedy(flip, envs::make_two_state_chain(0.5, 100), 3, rng);
    REQUIRE(r.returns.size() == 1);
    CHECK(r.partial_only);
    CHECK(r.returns[0] == doctest::Approx(1.0 + 0.0 + 0.25));
  }
}

TEST_CASE("Cart-Pole: a balancing policy reaches the geometric-series maximum") {
  double bound = 0.0;
  for (int k = 0; k < 500; ++k) bound += std::pow(0.99, k);
  const auto spec = envs::make_cart_pole();
  const Policy pd = [](const Vector& s) {
    return Action::discrete(s(2) + 0.5 * s(3) + 0.01 * s(0) + 0.1 * s(1) > 0.0 ? 1 : 0);
  };
  envs::Rng rng(2);
  const auto r = evaluate_greedy(pd, spec, 500, rng);
  REQUIRE(r.returns.size() == 1);
  CHECK(r.returns[0] == doctest::Approx(bound).epsilon(1e-12));
  // Random play stays below the bound.
  std::uniform_int_distribution<int> coin(0, 1);
  const Policy rand = [&](const Vector&) { return Action::discrete(coin(rng)); };
  for (double x : evaluate_greedy(rand, spec, 2000, rng).returns) CHECK(x <= bound + 1e-9);
}

TEST_CASE("oracle: two-state chain matches the closed form") {
  const auto spec = envs::make_two_state_chain(0.9);
  const QOracle oracle(spec, {{2}, 1e-12, 100000});
  const double hi = 1.0 / (1.0 - 0.9), lo = 0.9 / (1.0 - 0.9);
  CHECK(oracle.table(0, 1) == doctest::Approx(hi).epsilon(1e-10));
  CHECK(oracle.table(0, 0) == doctest::Approx(lo).epsilon(1e-10));
  CHECK(oracle.table(1, 0) == doctest::Approx(hi).epsilon(1e-10));
  CHECK(oracle.table(1, 1) == doctest::Approx(lo).epsilon(1e-10));
  CHECK(oracle.greedy_action(Vector::Zero(1)) == 1);
  CHECK(oracle.greedy_action(Vector::Ones(1)) == 0);
}

TEST_CASE("oracle: residuals contract by at most gamma") {
  const auto spec = envs::make_car_on_hill();
  const QOracle oracle(spec, {{60, 60}});
  const auto& res = oracle.residuals();
  REQUIRE(res.size() > 10);
  CHECK(res.back() < 1e-6);
  for (std::size_t i = 1; i < res.size(); ++i) CHECK(res[i] <= spec.gamma * res[i - 1] + 1e-15);
}

TEST_CASE("oracle: off-grid lookahead reproduces table entries at nodes") {
  // The table lags the final V by one sweep, so agreement is up to gamma * tolerance.
  const auto spec = envs::make_car_on_hill();
  const QOracle oracle(spec, {{41, 41}});
  for (std::size_t n = 0; n < oracle.node_count(); n += 97) {
    const Vector q = oracle.q(oracle.node_state(n));
    for (int a = 0; a < 2; ++a) CHECK(std::abs(q(a) - oracle.table(n, a)) <= spec.gamma * 1e-6);
  }
}

TEST_CASE("oracle: rejects stochastic or continuous tasks, reports non-convergence") {
  CHECK_THROWS_AS(QOracle(envs::make_inverted_pendulum()), ConfigError);
  CHECK_THROWS_AS(QOracle(envs::make_torque_pendulum()), ConfigError);
  CHECK_THROWS_WITH_AS(QOracle(envs::make_car_on_hill(), {{20, 20}, 1e-6, 5}),
                       doctest::Contains("did not converge"), std::runtime_error);
}

TEST_CASE("oracle greedy policy beats 1000 random policies on Car-On-Hill") {
  const auto spec = envs::make_car_on_hill();
  const QOracle oracle(spec, {{120, 120}});
  envs::Rng rng(3);
  const Policy greedy = [&](const Vector& s) { return Action::discrete(oracle.greedy_action(s)); };
  const double best = evaluate_greedy(greedy, spec, spec.horizon, rng).returns.at(0);
  CHECK(best > 0.0);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int p = 0; p < 1000; ++p) {
    const Policy rand = [&](const Vector&) { return Action::discrete(coin(rng)); };
    CHECK(evaluate_greedy(rand, spec, spec.horizon, rng).returns.at(0) <= best);
  }
}

TEST_CASE("q_l1_error") {
  const auto spec = envs::make_car_on_hill();
  const QOracle oracle(spec, {{50, 50}});
  const auto probes = sample_probe_states(spec, 100, 42);
  CHECK(probes.size() * spec.actions.values.size() == 200);
  CHECK(q_l1_error(oracle.as_function(), oracle, probes) == 0.0);
  const QFunction zero = [](const Vector&) { return Vector::Zero(2); };
  double expect = 0.0;
  for (const auto& s : probes) expect += oracle.q(s).cwiseAbs().sum();
  CHECK(q_l1_error(zero, oracle, probes) == doctest::Approx(expect / 200.0));
  const QFunction shifted = [&](const Vector& s) { return Vector(oracle.q(s).array() + 0.25); };
  CHECK(q_l1_error(shifted, oracle, probes) == doctest::Approx(0.25));
  // Probes are fixed by the seed and lie in the box.
  CHECK(sample_probe_states(spec, 100, 42)[17] == probes[17]);
  for (const auto& s : probes) {
    CHECK((s.array() >= spec.state_low.array()).all());
    CHECK((s.array() <= spec.state_high.array()).all());
  }
}

TEST_CASE("mean_ci and aggregate_curves") {
  SUBCASE("R = 1 gives zero width, flagged") {
    const std::vector<LearningCurve> runs = {curve(0, {1.0, 2.0})};
    const auto agg = aggregate_curves(runs, Metric::discounted_return);
    CHECK(agg.degenerate);
    CHECK(agg.per_task[1][0].half_width == 0.0);
    CHECK(agg.per_task[1][0].mean == 2.0);
  }
  SUBCASE("identical runs give zero width") {
    const std::vector<LearningCurve> runs = {curve(0, {1.0, 3.0}), curve(1, {1.0, 3.0}), curve(2, {1.0, 3.0})};
    const auto agg = aggregate_curves(runs, Metric::discounted_return);
    CHECK_FALSE(agg.degenerate);
    CHECK(agg.per_task[0][0].half_width == 0.0);
  }
  SUBCASE("R = 100 unit-variance noise gives half-width near 1.96 / 10") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<LearningCurve> runs;
    for (int r = 0; r < 100; ++r) runs.push_back(curve(r, {n(rng)}));
    const auto agg = aggregate_curves(runs, Metric::discounted_return);
    CHECK(agg.per_task[0][0].half_width == doctest::Approx(0.196).epsilon(0.15));
    // Exact for the sample standard deviation.
    std::vector<double> xs;
    for (const auto& c : runs) xs.push_back(c.records[0].returns[0]);
    double m = 0.0, ss = 0.0;
    for (double x : xs) m += x / 100.0;
    for (double x : xs) ss += (x - m) * (x - m);
    CHECK(agg.per_task[0][0].half_width == doctest::Approx(1.96 * std::sqrt(ss / 99.0) / 10.0).epsilon(1e-12));
  }
  SUBCASE("mismatched configs are rejected") {
    const std::vector<LearningCurve> runs = {curve(0, {1.0}, "x"), curve(1, {1.0}, "y")};
    CHECK_THROWS_AS(aggregate_curves(runs, Metric::discounted_return), ConfigError);
    const std::vector<LearningCurve> ragged = {curve(0, {1.0}), curve(1, {1.0, 2.0})};
    CHECK_THROWS_AS(aggregate_curves(ragged, Metric::discounted_return), ConfigError);
  }
  SUBCASE("non-increasing epochs are invalid") {
    LearningCurve c = curve(0, {1.0, 2.0});
    c.records[1].epoch = 0;
    CHECK_THROWS(c.validate());
  }
}

TEST_CASE("curve CSV round trip, with quoted task names") {
  LearningCurve c;
  c.algorithm = "mfqi";
  c.suite = "car_on_hill_8";
  c.tasks = {"car_on_hill(m=1,a=4)", "car \"b\""};
  c.seed = 7;
  c.records = {{0, {0.1, -0.2}, {1.5, 2.5}}, {1, {0.3, 1.0 / 3.0}, {1.0, 2.0}}};
  std::stringstream ss;
  write_curve_csv_header(ss);
  write_curve_csv(ss, c);
  const auto back = read_curve_csv(ss);
  REQUIRE(back.size() == 1);
  CHECK(back[0].tasks == c.tasks);
  CHECK(back[0].seed == 7);
  REQUIRE(back[0].records.size() == 2);
  CHECK(back[0].records[1].returns == c.records[1].returns);
  CHECK(back[0].records[0].q_error == c.records[0].q_error);
  CHECK(back[0].config_hash.empty());

  std::stringstream only;
  write_curve_csv_header(only, "abc123");
  write_curve_csv(only, c, Metric::q_error);
  const auto q = read_curve_csv(only);
  REQUIRE(q.size() == 1);
  CHECK(q[0].config_hash == "abc123");
  CHECK(q[0].records[1].returns.empty());
  CHECK(q[0].records[1].q_error == c.records[1].q_error);
}

TEST_CASE("oracle: doubling the Car-On-Hill grid moves probe Q* by under 1%") {
  const auto spec = envs::make_car_on_hill();
  const QOracle coarse(spec);
  const QOracle fine(spec, {{400, 400}});
  const auto probes = sample_probe_states(spec, 100, 2024);
  const double change = relative_l1_change(coarse, fine, probes);
  MESSAGE("relative L1 change 200 -> 400: " << change);
  CHECK(change < 0.01);
}
