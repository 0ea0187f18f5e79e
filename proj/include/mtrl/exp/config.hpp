#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mtrl/algos/fqi.hpp"
#include "mtrl/algos/trainer.hpp"
#include "mtrl/algos/transfer.hpp"
#include "mtrl/bounds/bounds.hpp"
#include "mtrl/mtnet/preset.hpp"

namespace mtrl::exp {

enum class ExperimentKind {
  mfqi_compare,
  mfqi_task_scaling,
  mdqn_compare,
  mdqn_transfer,
  mddpg_compare,
  mddpg_transfer,
  bounds_eval,
};

ExperimentKind experiment_kind_from_string(std::string_view name);
std::string_view to_string(ExperimentKind kind);

struct NetworkWidths {
  Eigen::Index input_width = 0;  // ignored by presets without input blocks
  std::vector<Eigen::Index> shared_widths;
};

struct OracleConfig {
  std::vector<int> resolution;  // empty: 200 per state dimension
  double tolerance = 1e-6;
  std::size_t probes = 100;
  std::uint64_t probe_seed = 2020;
};

struct TransferConfig {
  int target_task = 0;  // 1-based index into the suite
  std::vector<algos::TransferMode> modes;
  // Empty: the trunk is pretrained per seed on the remaining tasks inside the run.
  // A directory is searched for seed_<s>.net, a file is used for every seed.
  std::filesystem::path snapshot;
  std::filesystem::path actor_snapshot;
  std::filesystem::path critic_snapshot;
};

struct ExperimentConfig {
  static constexpr int current_schema = 1;
  int schema_version = current_schema;
  ExperimentKind kind = ExperimentKind::mfqi_compare;
  std::string suite;
  std::vector<int> tasks;  // 1-based subset of the suite, in order
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir;
  int workers = 1;

  algos::FqiConfig fqi;
  algos::CollectConfig collect;
  OracleConfig oracle;
  std::vector<int> task_counts{1, 2, 4, 8};
  algos::DqnConfig dqn;
  algos::DdpgConfig ddpg;
  std::map<std::string, NetworkWidths> networks;  // preset name -> widths override
  TransferConfig transfer;
  std::optional<bounds::BoundInputs> bounds;

  void validate() const;
  std::vector<envs::EnvSpec> selected_tasks() const;
  mtnet::ArchitecturePreset preset(mtnet::PresetName name) const;
};

// Defaults for `kind`: reference hyperparameters, suite, task subset, 20 seeds.
ExperimentConfig default_config(ExperimentKind kind);

// Fields not present keep the defaults of the config's kind. Unknown or
// ill-typed fields raise ConfigError naming the field.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

// SHA-256 over everything that affects a run's numbers: not output_dir,
// workers or the seed list.
std::string config_hash(const ExperimentConfig& c);

}  // namespace mtrl::exp
