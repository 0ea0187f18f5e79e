#include "mtrl/eval/curves.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include "mtrl/error.hpp"
#include "mtrl/util/csv.hpp"

namespace mtrl::eval {

using util::csv_field;
using util::csv_number;
using util::csv_split;

namespace {

const std::string hash_prefix = "# config_hash=";

const std::vector<double>& metric_values(const EpochRecord& r, Metric m) {
  return m == Metric::discounted_return ? r.returns : r.q_error;
}

double parse_number(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    if (s == "nan") return std::nan("");
    throw std::runtime_error("csv: bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string metric_name(Metric m) { return m == Metric::discounted_return ? "discounted_return" : "q_error"; }

void LearningCurve::validate() const {
  int last = -1;
  for (const auto& r : records) {
    if (r.epoch <= last) throw ConfigError("learning curve epochs must be strictly increasing");
    last = r.epoch;
    if (r.returns.size() != tasks.size()) throw ConfigError("learning curve: one return per task required");
    if (!r.q_error.empty() && r.q_error.size() != tasks.size()) {
      throw ConfigError("learning curve: q_error must be empty or one per task");
    }
    for (double v : r.returns) {
      if (!std::isfinite(v)) throw NonFiniteError("learning curve: non-finite return");
    }
  }
}

MeanCi mean_ci(std::span<const double> xs) {
  MeanCi out;
  out.n = xs.size();
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() == 1) {
    out.degenerate = true;
    return out;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  out.half_width = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
  return out;
}

AggregateCurve aggregate_curves(std::span<const LearningCurve> runs, Metric metric) {
  if (runs.empty()) throw ConfigError("aggregate_curves: no runs");
  const LearningCurve& first = runs.front();
  for (const auto& r : runs) {
    r.validate();
    if (r.algorithm != first.algorithm || r.suite != first.suite || r.tasks != first.tasks ||
        r.config_hash != first.config_hash) {
      throw ConfigError("aggregate_curves: runs come from different configurations (" + first.config_hash +
                        " vs " + r.config_hash + ")");
    }
    if (r.records.size() != first.records.size()) throw ConfigError("aggregate_curves: runs cover different epochs");
    for (std::size_t e = 0; e < r.records.size(); ++e) {
      if (r.records[e].epoch != first.records[e].epoch) throw ConfigError("aggregate_curves: runs cover different epochs");
    }
  }
  AggregateCurve out;
  out.algorithm = first.algorithm;
  out.suite = first.suite;
  out.tasks = first.tasks;
  out.config_hash = first.config_hash;
  out.runs = runs.size();
  out.degenerate = runs.size() == 1;
  for (std::size_t e = 0; e < first.records.size(); ++e) {
    out.epochs.push_back(first.records[e].epoch);
    std::vector<MeanCi> row;
    std::vector<double> run_means;
    for (std::size_t t = 0; t < first.tasks.size(); ++t) {
      std::vector<double> xs;
      for (const auto& r : runs) {
        const auto& vals = metric_values(r.records[e], metric);
        if (vals.empty()) throw ConfigError("aggregate_curves: metric " + metric_name(metric) + " missing");
        xs.push_back(vals[t]);
      }
      row.push_back(mean_ci(xs));
    }
    for (const auto& r : runs) {
      const auto& vals = metric_values(r.records[e], metric);
      double s = 0.0;
      for (double v : vals) s += v;
      run_means.push_back(s / static_cast<double>(vals.size()));
    }
    out.per_task.push_back(std::move(row));
    out.task_mean.push_back(mean_ci(run_means));
  }
  return out;
}

void write_curve_csv_header(std::ostream& os, const std::string& config_hash) {
  if (!config_hash.empty()) os << hash_prefix << config_hash << '\n';
  os << "algorithm,suite,task,seed,epoch,metric_name,value\n";
}

void write_curve_csv(std::ostream& os, const LearningCurve& curve, std::optional<Metric> only) {
  for (const auto& r : curve.records) {
    for (Metric m : {Metric::discounted_return, Metric::q_error}) {
      if (only && m != *only) continue;
      const auto& vals = metric_values(r, m);
      for (std::size_t t = 0; t < vals.size(); ++t) {
        os << csv_field(curve.algorithm) << ',' << csv_field(curve.suite) << ',' << csv_field(curve.tasks.at(t))
           << ',' << curve.seed << ',' << r.epoch << ',' << metric_name(m) << ',' << csv_number(vals[t]) << '\n';
      }
    }
  }
}

std::vector<LearningCurve> read_curve_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) return {};
  std::string hash;
  if (line.rfind(hash_prefix, 0) == 0) {
    hash = line.substr(hash_prefix.size());
    if (!std::getline(is, line)) return {};
  }
  if (csv_split(line) != std::vector<std::string>{"algorithm", "suite", "task", "seed", "epoch", "metric_name", "value"}) {
    throw std::runtime_error("csv: unexpected header '" + line + "'");
  }
  using Key = std::tuple<std::string, std::string, std::uint64_t>;
  std::vector<Key> order;
  std::map<Key, LearningCurve> curves;
  std::map<Key, std::map<int, std::map<std::string, std::map<std::string, double>>>> cells;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = csv_split(line);
    if (f.size() != 7) throw std::runtime_error("csv: expected 7 fields in '" + line + "'");
    const Key key{f[0], f[1], std::stoull(f[3])};
    auto [it, inserted] = curves.try_emplace(key);
    if (inserted) {
      order.push_back(key);
      it->second.algorithm = f[0];
      it->second.suite = f[1];
      it->second.seed = std::get<2>(key);
      it->second.config_hash = hash;
    }
    auto& tasks = it->second.tasks;
    if (std::find(tasks.begin(), tasks.end(), f[2]) == tasks.end()) tasks.push_back(f[2]);
    cells[key][std::stoi(f[4])][f[5]][f[2]] = parse_number(f[6]);
  }
  std::vector<LearningCurve> out;
  for (const auto& key : order) {
    LearningCurve c = curves[key];
    for (const auto& [epoch, metrics] : cells[key]) {
      EpochRecord r;
      r.epoch = epoch;
      for (Metric m : {Metric::discounted_return, Metric::q_error}) {
        auto mit = metrics.find(metric_name(m));
        if (mit == metrics.end()) continue;
        auto& dst = m == Metric::discounted_return ? r.returns : r.q_error;
        for (const auto& t : c.tasks) {
          auto v = mit->second.find(t);
          if (v == mit->second.end()) throw std::runtime_error("csv: missing " + metric_name(m) + " for task " + t);
          dst.push_back(v->second);
        }
      }
      c.records.push_back(std::move(r));
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace mtrl::eval
