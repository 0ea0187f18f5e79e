#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mtrl::eval {

struct EpochRecord {
  int epoch = 0;
  std::vector<double> returns;  // per task
  std::vector<double> q_error;  // per task, empty when not measured
};

struct LearningCurve {
  std::string algorithm;
  std::string suite;
  std::vector<std::string> tasks;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<EpochRecord> records;

  // Epochs strictly increasing, per-task widths consistent, values finite.
  void validate() const;
};

enum class Metric { discounted_return, q_error };
std::string metric_name(Metric m);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 * sample sd / sqrt(n)
  std::size_t n = 0;
  bool degenerate = false;  // n == 1: width 0 by convention
};
MeanCi mean_ci(std::span<const double> xs);

struct AggregateCurve {
  std::string algorithm;
  std::string suite;
  std::vector<std::string> tasks;
  std::string config_hash;
  std::vector<int> epochs;
  // [epoch][task]
  std::vector<std::vector<MeanCi>> per_task;
  // Mean over tasks of each run, then across runs.
  std::vector<MeanCi> task_mean;
  std::size_t runs = 0;
  bool degenerate = false;
};

// Runs must share algorithm, suite, tasks and config hash, and cover the same
// epochs. Throws ConfigError otherwise.
AggregateCurve aggregate_curves(std::span<const LearningCurve> runs, Metric metric);

// Long format: algorithm,suite,task,seed,epoch,metric_name,value. A non-empty
// config hash goes on a leading "# config_hash=<hex>" line.
void write_curve_csv_header(std::ostream& os, const std::string& config_hash = {});
void write_curve_csv(std::ostream& os, const LearningCurve& curve, std::optional<Metric> only = {});
// Reassembles curves (one per algorithm/suite/seed) from long-format rows.
std::vector<LearningCurve> read_curve_csv(std::istream& is);

}  // namespace mtrl::eval
