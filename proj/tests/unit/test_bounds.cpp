#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mtrl/bounds/bounds.hpp"
#include "mtrl/error.hpp"

using namespace mtrl;
using namespace mtrl::bounds;

namespace {

BoundInputs base_inputs(int K = 10) {
  BoundInputs in;
  in.gammas = {0.95, 0.9};
  in.iterations = K;
  in.r_max = {1.0, 1.0};
  in.eps_avg.assign(static_cast<std::size_t>(K), 0.0);
  in.c_table = {{0.0, 2.0}, {0.5, 1.0}, {1.0, 3.0}};
  return in;
}

ApproxInputs unit_approx() {
  ApproxInputs a;
  a.c1 = a.c2 = a.c3 = a.c4 = 1.0;
  a.lip_f = a.lip_h = 1.0;
  a.sup_g_w = a.sup_w_norm = a.o_h = a.min_g_h = a.sup_hw_norm = a.o_f = 1.0;
  a.n = 10;
  a.tasks = 2;
  a.delta = 0.1;
  return a;
}

}  // namespace

TEST_CASE("alpha series sums to one for 200 random (gamma, K)") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> g(0.01, 0.999);
  std::uniform_int_distribution<int> k(1, 300);
  for (int i = 0; i < 200; ++i) {
    const auto a = alpha_series(g(rng), k(rng));
    double s = 0.0;
    for (double x : a) s += x;
    CHECK(std::abs(s - 1.0) < 1e-10);
  }
}

TEST_CASE("alpha series values and monotonicity") {
  const auto a = alpha_series(0.95, 1);
  REQUIRE(a.size() == 2);
  CHECK(a[0] == doctest::Approx(0.05 / 0.0975).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(0.05 * 0.95 / 0.0975).epsilon(1e-14));
  CHECK(a[0] == doctest::Approx(0.512821).epsilon(1e-6));
  CHECK(a[1] == doctest::Approx(0.487179).epsilon(1e-6));
  const auto b = alpha_series(0.8, 12);
  for (std::size_t i = 1; i + 1 < b.size(); ++i) CHECK(b[i] > b[i - 1]);
  CHECK_THROWS_AS(alpha_series(1.0, 3), ConfigError);
  CHECK_THROWS_AS(alpha_series(0.0, 3), ConfigError);
}

TEST_CASE("error functional") {
  const auto a = alpha_series(0.95, 2);
  CHECK(error_functional(a, {0.0, 0.0}, 0.3) == 0.0);
  CHECK(error_functional(a, {1.5, 2.5}, 0.0) == doctest::Approx(4.0));
  CHECK(error_functional(a, {1.0, 1.0}, 1.0) == doctest::Approx(a[0] * a[0] + a[1] * a[1]));
  CHECK_THROWS_AS(error_functional(a, {1.0}, 0.5), ConfigError);
}

TEST_CASE("AVI bound with vanishing regression error") {
  BoundInputs in = base_inputs(10);
  in.gammas = {0.95};
  in.r_max = {1.0};
  const double expected = (2.0 * 0.95 / (0.05 * 0.05)) * (2.0 * std::pow(0.95, 10) / 0.05);
  CHECK(avi_bound(in).value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(avi_bound(in).value == doctest::Approx(18201.603).epsilon(1e-7));
  // Any C table gives the same value.
  in.c_table = {{0.0, 100.0}, {1.0, 7.0}};
  CHECK(avi_bound(in).value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("AVI uses the largest gamma and the mean reward bound") {
  BoundInputs in = base_inputs(5);
  in.gammas = {0.5, 0.9, 0.7};
  in.r_max = {1.0, 3.0};
  const double expected = (2.0 * 0.9 / (0.1 * 0.1)) * (2.0 * std::pow(0.9, 5) * 2.0 / 0.1);
  CHECK(avi_bound(in).value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("API bound and the ratio of second terms") {
  BoundInputs in = base_inputs(10);
  const double g = 0.95;
  CHECK(api_bound(in).value == doctest::Approx(2.0 * g / ((1 - g) * (1 - g)) * std::pow(g, 9) * 1.0).epsilon(1e-12));
  CHECK(avi_bound(in).value / api_bound(in).value == doctest::Approx(2.0 * g / (1.0 - g)).epsilon(1e-12));
}

TEST_CASE("regression term minimizes over the r grid") {
  BoundInputs in = base_inputs(3);
  in.gammas = {0.9};
  in.eps_avg = {1.0, 0.5, 0.25};
  in.c_table = {{0.0, 1.0}, {1.0, 1.0}};
  // With constant C the minimum of sum alpha^(2r) eps is at r = 1 (alpha < 1).
  const auto b = avi_bound(in);
  CHECK(b.r_star == 1.0);
  const auto a = alpha_series(0.9, 3);
  double e = 0.0;
  for (int k = 0; k < 3; ++k) e += a[k] * a[k] * in.eps_avg[k];
  const double expected = 2 * 0.9 / 0.01 * (std::sqrt(e) + 2 * std::pow(0.9, 3) / 0.1);
  CHECK(b.value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("bounds are non-decreasing in every error, reward bound and C entry") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    BoundInputs in = base_inputs(6);
    for (auto& e : in.eps_avg) e = u(rng);
    for (auto& c : in.c_table) c.second = 5.0 * u(rng);
    const double avi = avi_bound(in).value, api = api_bound(in).value;
    BoundInputs up = in;
    switch (trial % 3) {
      case 0: up.eps_avg[static_cast<std::size_t>(trial % 6)] += u(rng); break;
      case 1: up.r_max[0] += u(rng); break;
      default: up.c_table[static_cast<std::size_t>(trial % 3)].second += u(rng); break;
    }
    CHECK(avi_bound(up).value >= avi);
    CHECK(api_bound(up).value >= api);
  }
}

TEST_CASE("C table lookup") {
  const std::vector<std::pair<double, double>> t = {{0.0, 2.0}, {0.5, 1.0}, {1.0, 3.0}};
  CHECK(c_at(t, 0.25) == doctest::Approx(1.5));
  CHECK(c_at(t, 0.75) == doctest::Approx(2.0));
  CHECK(c_at({{0.3, 4.0}}, 0.9) == 4.0);
  CHECK_THROWS_AS(c_at({{0.2, 1.0}, {0.6, 2.0}}, 0.9), ConfigError);
  BoundInputs in = base_inputs();
  in.c_table.clear();
  CHECK_THROWS_AS(avi_bound(in), ConfigError);
}

TEST_CASE("eps* bound") {
  BoundInputs in = base_inputs();
  in.eps_star = EpsStarInputs{0.5, 1.0, {1.3, 0.7, 1.0}, {{}, {0.0}, {1.0, 1.0}}};
  CHECK(eps_star_bound(in, 0) == doctest::Approx(1.3 * 1.3));
  CHECK(eps_star_bound(in, 1) == doctest::Approx(0.49));
  CHECK(eps_star_bound(in, 2) == doctest::Approx(3.0625));
  // b_{2,1} gets weight (gamma C)^1, b_{2,0} weight (gamma C)^2.
  in.eps_star->b[2] = {1.0, 0.0};
  CHECK(eps_star_bound(in, 2) == doctest::Approx(1.25 * 1.25));
  CHECK_THROWS_AS(eps_star_bound(in, 3), ConfigError);
}

TEST_CASE("approximation-error bound") {
  BoundInputs in = base_inputs();
  ApproxInputs zero;
  zero.n = 1;
  zero.tasks = 1;
  zero.delta = 0.5;
  in.approx = zero;
  // Only the concentration term survives.
  CHECK(approx_bound_rhs(in) == doctest::Approx(std::sqrt(8.0 * std::log(6.0))).epsilon(1e-14));
  in.approx->n = 8.0 * std::log(6.0);
  CHECK(approx_bound_rhs(in) == doctest::Approx(1.0).epsilon(1e-14));

  in.approx = unit_approx();
  const auto& a = *in.approx;
  const double nt = a.n * a.tasks;
  const double expected = (1.0 / a.n + 1.0 / nt + 1.0 / nt) + 1.0 / (a.n * std::sqrt(a.tasks)) +
                          std::sqrt(8.0 * std::log(3.0 / a.delta) / nt);
  CHECK(approx_bound_rhs(in) == doctest::Approx(expected).epsilon(1e-14));

  in.approx->delta = 1.0;
  CHECK_THROWS_AS(approx_bound_rhs(in), ConfigError);
}

TEST_CASE("approximation-error bound is non-decreasing in its inputs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BoundInputs in = base_inputs();
  for (int trial = 0; trial < 13 * 20; ++trial) {
    in.approx = unit_approx();
    const double before = approx_bound_rhs(in);
    double* fields[] = {&in.approx->c1,      &in.approx->c2,    &in.approx->c3,          &in.approx->c4,
                        &in.approx->lip_f,   &in.approx->lip_h, &in.approx->sup_g_w,     &in.approx->sup_w_norm,
                        &in.approx->o_h,     &in.approx->min_g_h, &in.approx->sup_hw_norm, &in.approx->o_f,
                        &in.approx->eps_star_avg};
    *fields[trial % 13] += u(rng);
    CHECK(approx_bound_rhs(in) >= before);
  }
}

TEST_CASE("c2 term decays as 1/sqrt(nT) under the stated input scalings") {
  // sup ||w(X)|| grows like sqrt(nT); everything else in the c2 term is fixed.
  const double n = 50.0;
  std::vector<double> log_t, log_term;
  for (double T : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    BoundInputs in = base_inputs();
    ApproxInputs a;
    a.c2 = 1.0;
    a.lip_f = 1.0;
    a.o_h = 1.0;
    a.sup_w_norm = std::sqrt(n * T);
    a.n = n;
    a.tasks = T;
    a.delta = 0.5;
    in.approx = a;
    ApproxInputs without = a;
    without.c2 = 0.0;
    BoundInputs in0 = in;
    in0.approx = without;
    log_t.push_back(std::log(T));
    log_term.push_back(std::log(approx_bound_rhs(in) - approx_bound_rhs(in0)));
  }
  for (std::size_t i = 1; i < log_t.size(); ++i) {
    CHECK((log_term[i] - log_term[i - 1]) / (log_t[i] - log_t[i - 1]) == doctest::Approx(-0.5).epsilon(1e-9));
  }
  // Doubling T divides the term by sqrt(2).
  CHECK(std::exp(log_term[0] - log_term[1]) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("Gaussian complexity: folded-normal oracle and homogeneity") {
  std::mt19937_64 rng(4);
  Vector v(5);
  v << 1.0, -2.0, 0.5, 0.0, 3.0;
  const double truth = v.norm() * std::sqrt(2.0 / std::numbers::pi);
  const auto e = gaussian_complexity_mc({v, -v}, 20000, rng);
  CHECK(std::abs(e.estimate - truth) < 3.0 * e.standard_error);
  const auto scaled = gaussian_complexity_mc({-2.5 * v, 2.5 * v}, 20000, rng);
  const double combined = std::sqrt(scaled.standard_error * scaled.standard_error +
                                    2.5 * 2.5 * e.standard_error * e.standard_error);
  CHECK(std::abs(scaled.estimate - 2.5 * e.estimate) < 3.0 * combined);
  CHECK_THROWS_AS(gaussian_complexity_mc({}, 10, rng), ConfigError);
}

TEST_CASE("singleton classes stay within 3 SE of zero in at least 99% of 1000 repetitions") {
  std::mt19937_64 rng(5);
  Vector v(8);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 0.3 * double(i) - 1.0;
  int inside = 0;
  for (int r = 0; r < 1000; ++r) {
    const auto e = gaussian_complexity_mc({v}, 200, rng);
    inside += std::abs(e.estimate) < 3.0 * e.standard_error;
  }
  CHECK(inside >= 990);
}

TEST_CASE("Lipschitz quotient estimator") {
  std::mt19937_64 rng(6);
  Eigen::MatrixXd A(3, 2);
  A << 1.0, 2.0, -1.0, 0.5, 0.0, 3.0;
  const Function f = [&](const Vector& y) { return Vector(A * y); };
  const Function minus_f = [&](const Vector& y) { return Vector(-(A * y)); };
  Vector y1(2), y2(2), y3(2);
  y1 << 0.0, 0.0;
  y2 << 1.0, 0.0;
  y3 << 0.0, 1.0;
  const std::vector<std::pair<Vector, Vector>> probes = {{y1, y2}, {y1, y3}};

  SUBCASE("constant functions give zero") {
    const Function c1 = [](const Vector&) { return Vector::Constant(3, 2.0); };
    const Function c2 = [](const Vector&) { return Vector::Constant(3, -1.0); };
    const auto e = lipschitz_quotient_mc({c1, c2}, probes, 500, rng);
    CHECK(e.best.estimate == 0.0);
    CHECK(e.lower_estimate);
  }
  SUBCASE("singleton class is zero-mean") {
    const auto e = lipschitz_quotient_mc({f}, {{y1, y3}}, 5000, rng);
    CHECK(std::abs(e.best.estimate) < 3.0 * e.best.standard_error);
  }
  SUBCASE("{f, -f} with linear f matches the folded-normal value of the best pair") {
    const auto e = lipschitz_quotient_mc({f, minus_f}, probes, 20000, rng);
    const double q1 = (A * (y1 - y2)).norm() / (y1 - y2).norm();
    const double q2 = (A * (y1 - y3)).norm() / (y1 - y3).norm();
    CHECK(e.pair == 1);
    CHECK(std::abs(e.best.estimate - std::max(q1, q2) * std::sqrt(2.0 / std::numbers::pi)) <
          3.0 * e.best.standard_error);
  }
  SUBCASE("coincident pair is rejected") {
    CHECK_THROWS_AS(lipschitz_quotient_mc({f}, {{y2, y2}}, 10, rng), ConfigError);
  }
}

TEST_CASE("bound inputs JSON round trip, stable hash and CSV rows") {
  BoundInputs in = base_inputs(4);
  in.eps_avg = {0.1, 0.2, 0.3, 0.4};
  in.eps_star = EpsStarInputs{0.5, 1.0, {1.0, 1.0}, {{}, {0.2}}};
  in.approx = unit_approx();
  const BoundInputs back = bound_inputs_from_json(to_json(in));
  CHECK(inputs_hash(back) == inputs_hash(in));
  CHECK(inputs_hash(in).size() == 64);
  CHECK(avi_bound(back).value == avi_bound(in).value);
  const std::string csv = bounds_csv(in);
  CHECK(csv.rfind("bound,inputs_hash,r_star,value\n", 0) == 0);
  CHECK(csv.find("avi," + inputs_hash(in)) != std::string::npos);
  CHECK(csv.find("eps_star_1,") != std::string::npos);
  CHECK(csv.find("approx_rhs,") != std::string::npos);
  nlohmann::json bad = to_json(in);
  bad["gammas"] = {1.2};
  CHECK_THROWS_AS(bound_inputs_from_json(bad), ConfigError);
  bad = to_json(in);
  bad.erase("K");
  CHECK_THROWS_AS(bound_inputs_from_json(bad), ConfigError);
}
