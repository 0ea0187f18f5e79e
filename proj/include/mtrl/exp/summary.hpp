#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mtrl/eval/curves.hpp"

namespace mtrl::exp {

// All per-seed curves of one arm directory, returns and q-error merged.
std::vector<eval::LearningCurve> load_arm_curves(const std::filesystem::path& arm_dir);

// Writes summary.csv and summary.json into `run_dir`: one row per
// (algorithm, task, epoch, metric) plus a task-mean row ("*"). Throws
// ConfigError when curves carry different config hashes or nothing completed.
struct SummaryReport {
  std::filesystem::path csv;
  std::filesystem::path json;
  std::size_t arms = 0;
};
SummaryReport emit_summary(const std::filesystem::path& run_dir);

}  // namespace mtrl::exp
