#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace mtrl::bounds {

using Vector = Eigen::VectorXd;

struct EpsStarInputs {
  double gamma = 0.0;  // discount of the task attaining the minimum
  double c_ae = 0.0;
  std::vector<double> d;               // d_k, k = 0..
  std::vector<std::vector<double>> b;  // b[k][i], i < k
};

struct ApproxInputs {
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  double lip_f = 0;        // L(F)
  double lip_h = 0;        // L(H)
  double sup_g_w = 0;      // sup_l G(W(X_l))
  double sup_w_norm = 0;   // sup ||w(X)||
  double o_h = 0;          // O(H)
  double min_g_h = 0;      // min_p G(H(p))
  double sup_hw_norm = 0;  // sup ||h(w(X))||
  double o_f = 0;          // O(F)
  double n = 1;
  double tasks = 1;
  double delta = 0.05;
  double eps_star_avg = 0;
};

struct BoundInputs {
  std::vector<double> gammas;  // per task; the maximum is used
  int iterations = 1;          // K
  std::vector<double> r_max;   // per task; the mean is used
  std::vector<double> eps_avg; // k = 0..K-1
  // (r, C(r)) pairs; linear interpolation in r. A single pair is constant.
  std::vector<std::pair<double, double>> c_table;
  int r_grid_points = 101;
  std::optional<EpsStarInputs> eps_star;
  std::optional<ApproxInputs> approx;

  double gamma() const;
  double r_max_avg() const;
  void validate() const;
};

BoundInputs bound_inputs_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoundInputs& in);
std::string inputs_hash(const BoundInputs& in);

// alpha_0..alpha_K.
std::vector<double> alpha_series(double gamma, int K);
// sum_k alpha_k^(2r) eps_k over k < K; alpha must hold at least eps.size() entries.
double error_functional(const std::vector<double>& alpha, const std::vector<double>& eps, double r);
double c_at(const std::vector<std::pair<double, double>>& table, double r);

struct BoundValue {
  double value = 0.0;
  double r_star = 0.0;
};
BoundValue avi_bound(const BoundInputs& in);
BoundValue api_bound(const BoundInputs& in);
double eps_star_bound(const BoundInputs& in, int k);
double approx_bound_rhs(const BoundInputs& in);

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

// E sup_{v in cls} <g, v>, g standard normal, from M draws.
McEstimate gaussian_complexity_mc(const std::vector<Vector>& cls, int samples, std::mt19937_64& rng);

using Function = std::function<Vector(const Vector&)>;
struct LipschitzEstimate {
  McEstimate best;  // at the maximizing pair
  std::size_t pair = 0;
  // Always true: the supremum over all pairs is only probed.
  bool lower_estimate = true;
};
LipschitzEstimate lipschitz_quotient_mc(const std::vector<Function>& cls,
                                        const std::vector<std::pair<Vector, Vector>>& probes, int samples,
                                        std::mt19937_64& rng);

// One CSV row per bound: bound,inputs_hash,r_star,value
std::string bounds_csv(const BoundInputs& in);

}  // namespace mtrl::bounds
