#include "mtrl/exp/summary.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "mtrl/error.hpp"
#include "mtrl/util/csv.hpp"

namespace mtrl::exp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<eval::LearningCurve> read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return eval::read_curve_csv(in);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<eval::LearningCurve> load_arm_curves(const fs::path& arm_dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(arm_dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("seed_", 0) == 0 && ends_with(name, "_returns.csv")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<eval::LearningCurve> out;
  for (const auto& f : files) {
    auto curves = read_file(f);
    if (curves.size() != 1) throw std::runtime_error(f.string() + ": expected one curve");
    auto c = std::move(curves[0]);
    std::string q_name = f.filename().string();
    q_name.replace(q_name.size() - std::string("_returns.csv").size(), std::string::npos, "_q_error.csv");
    const fs::path q_file = f.parent_path() / q_name;
    if (fs::exists(q_file)) {
      auto qs = read_file(q_file);
      if (qs.size() != 1 || qs[0].records.size() != c.records.size() || qs[0].config_hash != c.config_hash) {
        throw std::runtime_error(q_file.string() + " does not match " + f.string());
      }
      for (std::size_t k = 0; k < c.records.size(); ++k) {
        if (qs[0].records[k].epoch != c.records[k].epoch) throw std::runtime_error(q_file.string() + ": epoch mismatch");
        c.records[k].q_error = qs[0].records[k].q_error;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

SummaryReport emit_summary(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw ConfigError("summarize: " + run_dir.string() + " is not a directory");
  std::vector<fs::path> arm_dirs;
  for (const auto& e : fs::directory_iterator(run_dir)) {
    if (e.is_directory() && e.path().filename() != "snapshots") arm_dirs.push_back(e.path());
  }
  std::sort(arm_dirs.begin(), arm_dirs.end());

  std::string hash;
  bool have_hash = false;
  std::vector<std::pair<eval::Metric, eval::AggregateCurve>> aggregates;
  for (const auto& dir : arm_dirs) {
    const auto curves = load_arm_curves(dir);
    if (curves.empty()) continue;
    for (const auto& c : curves) {
      if (!have_hash) {
        hash = c.config_hash;
        have_hash = true;
      } else if (c.config_hash != hash) {
        throw ConfigError("summarize: mixed config hashes in " + run_dir.string() + " (" + hash + " vs " +
                          c.config_hash + " in " + dir.filename().string() + ")");
      }
    }
    aggregates.emplace_back(eval::Metric::discounted_return, eval::aggregate_curves(curves, eval::Metric::discounted_return));
    if (!curves[0].records.empty() && !curves[0].records[0].q_error.empty()) {
      aggregates.emplace_back(eval::Metric::q_error, eval::aggregate_curves(curves, eval::Metric::q_error));
    }
  }
  if (aggregates.empty()) throw ConfigError("summarize: no completed seed under " + run_dir.string());

  using util::csv_field;
  using util::csv_number;
  std::ostringstream csv;
  csv << "# config_hash=" << hash << '\n';
  csv << "algorithm,suite,task,epoch,metric_name,mean,ci_half_width,n\n";
  json rows = json::array();
  std::map<std::string, std::size_t> arm_runs;
  for (const auto& [metric, agg] : aggregates) {
    arm_runs[agg.algorithm] = agg.runs;
    auto emit = [&](const std::string& task, int epoch, const eval::MeanCi& ci) {
      csv << csv_field(agg.algorithm) << ',' << csv_field(agg.suite) << ',' << csv_field(task) << ',' << epoch << ','
          << eval::metric_name(metric) << ',' << csv_number(ci.mean) << ',' << csv_number(ci.half_width) << ','
          << ci.n << '\n';
      rows.push_back({{"algorithm", agg.algorithm},
                      {"suite", agg.suite},
                      {"task", task},
                      {"epoch", epoch},
                      {"metric_name", eval::metric_name(metric)},
                      {"mean", ci.mean},
                      {"ci_half_width", ci.half_width},
                      {"n", ci.n}});
    };
    for (std::size_t k = 0; k < agg.epochs.size(); ++k) {
      for (std::size_t t = 0; t < agg.tasks.size(); ++t) emit(agg.tasks[t], agg.epochs[k], agg.per_task[k][t]);
      emit("*", agg.epochs[k], agg.task_mean[k]);
    }
  }
  json doc;
  doc["config_hash"] = hash;
  doc["runs"] = arm_runs;
  doc["rows"] = rows;

  SummaryReport report;
  report.csv = run_dir / "summary.csv";
  report.json = run_dir / "summary.json";
  report.arms = arm_runs.size();
  std::ofstream(report.csv, std::ios::binary) << csv.str();
  std::ofstream(report.json, std::ios::binary) << doc.dump(2) << '\n';
  return report;
}

}  // namespace mtrl::exp
