#include "mtrl/bounds/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mtrl/error.hpp"
#include "mtrl/util/csv.hpp"
#include "mtrl/util/hash.hpp"

namespace mtrl::bounds {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("bound inputs: " + what);
}

bool non_negative(const std::vector<double>& xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x) && x >= 0.0; });
}

std::vector<double> r_grid(int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = points == 1 ? 0.0 : double(i) / (points - 1);
  return g;
}

// min over the r grid of sqrt(C(r) E(r)).
BoundValue regression_term(const BoundInputs& in) {
  const auto alpha = alpha_series(in.gamma(), in.iterations);
  BoundValue best{std::numeric_limits<double>::infinity(), 0.0};
  for (double r : r_grid(in.r_grid_points)) {
    const double v = std::sqrt(c_at(in.c_table, r)) * std::sqrt(error_functional(alpha, in.eps_avg, r));
    if (v < best.value) best = {v, r};
  }
  return best;
}

}  // namespace

double BoundInputs::gamma() const { return *std::max_element(gammas.begin(), gammas.end()); }

double BoundInputs::r_max_avg() const {
  return std::accumulate(r_max.begin(), r_max.end(), 0.0) / static_cast<double>(r_max.size());
}

void BoundInputs::validate() const {
  require(!gammas.empty(), "gammas must not be empty");
  for (double g : gammas) require(g > 0.0 && g < 1.0, "every gamma must lie in (0, 1)");
  require(iterations >= 1, "K must be at least 1");
  require(!r_max.empty() && non_negative(r_max), "r_max must be non-empty and non-negative");
  require(static_cast<int>(eps_avg.size()) == iterations, "eps_avg must have K entries");
  require(non_negative(eps_avg), "eps_avg must be non-negative");
  require(!c_table.empty(), "C table must not be empty");
  for (const auto& [r, c] : c_table) {
    require(r >= 0.0 && r <= 1.0, "C table r values must lie in [0, 1]");
    require(std::isfinite(c) && c >= 0.0, "C table values must be non-negative");
  }
  require(r_grid_points >= 1, "r grid needs at least one point");
}

double c_at(const std::vector<std::pair<double, double>>& table, double r) {
  if (table.empty()) throw ConfigError("bound inputs: C table must not be empty");
  if (table.size() == 1) return table.front().second;
  auto sorted = table;
  std::sort(sorted.begin(), sorted.end());
  if (r < sorted.front().first - 1e-12 || r > sorted.back().first + 1e-12) {
    throw ConfigError("bound inputs: C table does not cover r = " + std::to_string(r));
  }
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const auto [r0, c0] = sorted[i - 1];
    const auto [r1, c1] = sorted[i];
    if (r <= r1) {
      if (r1 == r0) return std::max(c0, c1);
      const double w = std::clamp((r - r0) / (r1 - r0), 0.0, 1.0);
      return c0 + w * (c1 - c0);
    }
  }
  return sorted.back().second;
}

std::vector<double> alpha_series(double gamma, int K) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("alpha_series: gamma must lie in (0, 1)");
  if (K < 1) throw ConfigError("alpha_series: K must be at least 1");
  const double denom = 1.0 - std::pow(gamma, K + 1);
  std::vector<double> a(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k < K; ++k) a[static_cast<std::size_t>(k)] = (1.0 - gamma) * std::pow(gamma, K - k - 1) / denom;
  a[static_cast<std::size_t>(K)] = (1.0 - gamma) * std::pow(gamma, K) / denom;
  return a;
}

double error_functional(const std::vector<double>& alpha, const std::vector<double>& eps, double r) {
  if (alpha.size() != eps.size() + 1) {
    throw ConfigError("error_functional: expected " + std::to_string(alpha.size() - 1) + " errors, got " +
                      std::to_string(eps.size()));
  }
  if (r < 0.0 || r > 1.0) throw ConfigError("error_functional: r must lie in [0, 1]");
  double s = 0.0;
  for (std::size_t k = 0; k < eps.size(); ++k) s += std::pow(alpha[k], 2.0 * r) * eps[k];
  return s;
}

BoundValue avi_bound(const BoundInputs& in) {
  in.validate();
  const double g = in.gamma();
  BoundValue b = regression_term(in);
  b.value = 2.0 * g / ((1.0 - g) * (1.0 - g)) *
            (b.value + 2.0 * std::pow(g, in.iterations) * in.r_max_avg() / (1.0 - g));
  return b;
}

BoundValue api_bound(const BoundInputs& in) {
  in.validate();
  const double g = in.gamma();
  BoundValue b = regression_term(in);
  b.value = 2.0 * g / ((1.0 - g) * (1.0 - g)) * (b.value + std::pow(g, in.iterations - 1) * in.r_max_avg());
  return b;
}

double eps_star_bound(const BoundInputs& in, int k) {
  if (!in.eps_star) throw ConfigError("eps_star_bound: missing eps_star inputs");
  const auto& e = *in.eps_star;
  if (k < 0 || static_cast<std::size_t>(k) >= e.d.size()) throw ConfigError("eps_star_bound: no d_k for k = " + std::to_string(k));
  double s = e.d[static_cast<std::size_t>(k)];
  if (k > 0) {
    if (static_cast<std::size_t>(k) >= e.b.size() || e.b[static_cast<std::size_t>(k)].size() < static_cast<std::size_t>(k)) {
      throw ConfigError("eps_star_bound: b_k needs " + std::to_string(k) + " entries");
    }
    const auto& bk = e.b[static_cast<std::size_t>(k)];
    const double q = e.gamma * e.c_ae;
    for (int i = 0; i < k; ++i) s += std::pow(q, i + 1) * bk[static_cast<std::size_t>(k - 1 - i)];
  }
  return s * s;
}

double approx_bound_rhs(const BoundInputs& in) {
  if (!in.approx) throw ConfigError("approx_bound_rhs: missing approximation inputs");
  const auto& a = *in.approx;
  if (!(a.delta > 0.0 && a.delta < 1.0)) throw ConfigError("approx_bound_rhs: delta must lie in (0, 1)");
  if (a.n < 1.0 || a.tasks < 1.0) throw ConfigError("approx_bound_rhs: n and T must be at least 1");
  const double nt = a.n * a.tasks;
  return a.lip_f * (a.c1 * a.lip_h * a.sup_g_w / a.n + a.c2 * a.sup_w_norm * a.o_h / nt + a.c3 * a.min_g_h / nt) +
         a.c4 * a.sup_hw_norm * a.o_f / (a.n * std::sqrt(a.tasks)) + std::sqrt(8.0 * std::log(3.0 / a.delta) / nt) +
         a.eps_star_avg;
}

McEstimate gaussian_complexity_mc(const std::vector<Vector>& cls, int samples, std::mt19937_64& rng) {
  if (cls.empty()) throw ConfigError("gaussian_complexity_mc: empty class");
  if (samples < 2) throw ConfigError("gaussian_complexity_mc: need at least 2 samples");
  const auto dim = cls.front().size();
  for (const auto& v : cls) {
    if (v.size() != dim) throw ShapeError("gaussian_complexity_mc: class members differ in length");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector g(dim);
  double sum = 0.0, sum_sq = 0.0;
  for (int m = 0; m < samples; ++m) {
    for (Eigen::Index i = 0; i < dim; ++i) g(i) = normal(rng);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : cls) best = std::max(best, g.dot(v));
    sum += best;
    sum_sq += best * best;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, (sum_sq - samples * mean * mean) / (samples - 1));
  return {mean, std::sqrt(var / samples)};
}

LipschitzEstimate lipschitz_quotient_mc(const std::vector<Function>& cls,
                                        const std::vector<std::pair<Vector, Vector>>& probes, int samples,
                                        std::mt19937_64& rng) {
  if (cls.empty()) throw ConfigError("lipschitz_quotient_mc: empty class");
  if (probes.empty()) throw ConfigError("lipschitz_quotient_mc: no probe pairs");
  LipschitzEstimate out;
  out.best.estimate = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto& [y, y2] = probes[p];
    const double dist = (y - y2).norm();
    if (!(dist > 0.0)) throw ConfigError("lipschitz_quotient_mc: probe pair " + std::to_string(p) + " coincides");
    std::vector<Vector> diffs;
    for (const auto& f : cls) diffs.push_back(f(y) - f(y2));
    McEstimate e = gaussian_complexity_mc(diffs, samples, rng);
    e.estimate /= dist;
    e.standard_error /= dist;
    if (e.estimate > out.best.estimate) {
      out.best = e;
      out.pair = p;
    }
  }
  return out;
}

nlohmann::json to_json(const BoundInputs& in) {
  nlohmann::json j;
  j["gammas"] = in.gammas;
  j["K"] = in.iterations;
  j["r_max"] = in.r_max;
  j["eps_avg"] = in.eps_avg;
  j["c_table"] = nlohmann::json::array();
  for (const auto& [r, c] : in.c_table) j["c_table"].push_back({r, c});
  j["r_grid_points"] = in.r_grid_points;
  if (in.eps_star) {
    j["eps_star"] = {{"gamma", in.eps_star->gamma}, {"c_ae", in.eps_star->c_ae}, {"d", in.eps_star->d},
                     {"b", in.eps_star->b}};
  }
  if (in.approx) {
    const auto& a = *in.approx;
    j["approx"] = {{"c1", a.c1},
                   {"c2", a.c2},
                   {"c3", a.c3},
                   {"c4", a.c4},
                   {"lip_f", a.lip_f},
                   {"lip_h", a.lip_h},
                   {"sup_g_w", a.sup_g_w},
                   {"sup_w_norm", a.sup_w_norm},
                   {"o_h", a.o_h},
                   {"min_g_h", a.min_g_h},
                   {"sup_hw_norm", a.sup_hw_norm},
                   {"o_f", a.o_f},
                   {"n", a.n},
                   {"T", a.tasks},
                   {"delta", a.delta},
                   {"eps_star_avg", a.eps_star_avg}};
  }
  return j;
}

BoundInputs bound_inputs_from_json(const nlohmann::json& j) {
  try {
    BoundInputs in;
    in.gammas = j.at("gammas").get<std::vector<double>>();
    in.iterations = j.at("K").get<int>();
    in.r_max = j.at("r_max").get<std::vector<double>>();
    in.eps_avg = j.at("eps_avg").get<std::vector<double>>();
    for (const auto& row : j.at("c_table")) in.c_table.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    in.r_grid_points = j.value("r_grid_points", 101);
    if (j.contains("eps_star")) {
      const auto& e = j["eps_star"];
      in.eps_star = EpsStarInputs{e.at("gamma").get<double>(), e.at("c_ae").get<double>(),
                                  e.at("d").get<std::vector<double>>(),
                                  e.value("b", std::vector<std::vector<double>>{})};
    }
    if (j.contains("approx")) {
      const auto& a = j["approx"];
      ApproxInputs x;
      x.c1 = a.at("c1");
      x.c2 = a.at("c2");
      x.c3 = a.at("c3");
      x.c4 = a.at("c4");
      x.lip_f = a.at("lip_f");
      x.lip_h = a.at("lip_h");
      x.sup_g_w = a.at("sup_g_w");
      x.sup_w_norm = a.at("sup_w_norm");
      x.o_h = a.at("o_h");
      x.min_g_h = a.at("min_g_h");
      x.sup_hw_norm = a.at("sup_hw_norm");
      x.o_f = a.at("o_f");
      x.n = a.at("n");
      x.tasks = a.at("T");
      x.delta = a.at("delta");
      x.eps_star_avg = a.value("eps_star_avg", 0.0);
      in.approx = x;
    }
    in.validate();
    return in;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bound inputs: ") + e.what());
  }
}

std::string inputs_hash(const BoundInputs& in) { return util::sha256_hex(to_json(in).dump()); }

std::string bounds_csv(const BoundInputs& in) {
  using util::csv_number;
  const std::string h = inputs_hash(in);
  std::ostringstream os;
  os << "bound,inputs_hash,r_star,value\n";
  const auto avi = avi_bound(in);
  const auto api = api_bound(in);
  os << "avi," << h << ',' << csv_number(avi.r_star) << ',' << csv_number(avi.value) << '\n';
  os << "api," << h << ',' << csv_number(api.r_star) << ',' << csv_number(api.value) << '\n';
  if (in.eps_star) {
    for (std::size_t k = 0; k < in.eps_star->d.size(); ++k) {
      os << "eps_star_" << k << ',' << h << ",," << csv_number(eps_star_bound(in, static_cast<int>(k))) << '\n';
    }
  }
  if (in.approx) os << "approx_rhs," << h << ",," << csv_number(approx_bound_rhs(in)) << '\n';
  return os.str();
}

}  // namespace mtrl::bounds
