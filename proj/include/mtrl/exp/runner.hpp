#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mtrl/exp/config.hpp"

namespace mtrl::exp {

// Worker slots: the configured count, capped by MTRL_WORKERS when set.
int resolve_workers(int configured);

struct RunOptions {
  std::ostream* log = nullptr;  // one progress line per finished job
};

struct RunReport {
  std::string config_hash;
  std::size_t jobs_run = 0;
  std::size_t jobs_skipped = 0;  // already complete from an earlier invocation
  double wall_clock_seconds = 0.0;
  std::filesystem::path manifest;
};

// Runs every (arm, seed) job of the config into config.output_dir:
//   config.json, manifest.json,
//   <arm>/seed_<s>_returns.csv, <arm>/seed_<s>_q_error.csv (fitted-Q kinds),
//   <arm>/seed_<s>.json (job record), snapshots/<arm>/seed_<s>*.net.
// Jobs whose record matches the config hash and artifact hashes are skipped.
// bounds_eval writes bounds.csv only.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Arms run by a config kind, in output order.
std::vector<std::string> experiment_arms(const ExperimentConfig& config);

}  // namespace mtrl::exp
