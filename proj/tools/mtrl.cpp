// mtrl: run experiment grids, summarize run directories, evaluate bounds.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtrl/error.hpp"
#include "mtrl/exp/config.hpp"
#include "mtrl/exp/runner.hpp"
#include "mtrl/exp/summary.hpp"

namespace {

enum Exit { ok = 0, config_error = 1, runtime_failure = 2 };

using namespace mtrl;

int run(const std::string& path, int workers, bool quiet, bool transfer_only) {
  exp::ExperimentConfig config = exp::load_config(path);
  if (transfer_only && config.kind != exp::ExperimentKind::mdqn_transfer &&
      config.kind != exp::ExperimentKind::mddpg_transfer) {
    throw ConfigError("transfer: config kind is " + std::string(exp::to_string(config.kind)) +
                      ", expected mdqn_transfer or mddpg_transfer");
  }
  if (workers > 0) config.workers = workers;
  exp::RunOptions options;
  if (!quiet) options.log = &std::cerr;
  const auto report = exp::run_experiment(config, options);
  std::cout << "config_hash " << report.config_hash << "\n"
            << "jobs run " << report.jobs_run << ", skipped " << report.jobs_skipped << "\n"
            << "manifest " << report.manifest.string() << "\n";
  return ok;
}

int run_bounds(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("bounds: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("bounds: " + path + " is not valid JSON: " + e.what());
  }
  if (!j.contains("kind")) {
    std::cout << bounds::bounds_csv(bounds::bound_inputs_from_json(j));
    return ok;
  }
  const auto config = exp::config_from_json(j);
  if (config.kind != exp::ExperimentKind::bounds_eval) throw ConfigError("bounds: config kind must be bounds_eval");
  exp::run_experiment(config);
  std::cout << bounds::bounds_csv(*config.bounds);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task fitted-Q / DQN / DDPG experiments"};
  app.require_subcommand(1);

  std::string config_path, run_dir, kind;
  int workers = 0;
  bool quiet = false;

  auto* run_cmd = app.add_subcommand("run", "Run every (arm, seed) job of an experiment config");
  run_cmd->add_option("config", config_path, "Experiment config (JSON)")->required();
  run_cmd->add_option("-w,--workers", workers, "Worker slots (capped by MTRL_WORKERS)");
  run_cmd->add_flag("-q,--quiet", quiet, "No per-job progress lines");

  auto* transfer_cmd = app.add_subcommand("transfer", "Run a transfer experiment config");
  transfer_cmd->add_option("config", config_path, "mdqn_transfer or mddpg_transfer config")->required();
  transfer_cmd->add_option("-w,--workers", workers, "Worker slots (capped by MTRL_WORKERS)");
  transfer_cmd->add_flag("-q,--quiet", quiet, "No per-job progress lines");

  auto* summarize_cmd = app.add_subcommand("summarize", "Aggregate a run directory into summary.csv/json");
  summarize_cmd->add_option("dir", run_dir, "Run directory")->required();

  auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate the error bounds; prints CSV");
  bounds_cmd->add_option("config", config_path, "bounds_eval config or bare bound inputs (JSON)")->required();

  auto* defaults_cmd = app.add_subcommand("defaults", "Print the default config of an experiment kind");
  defaults_cmd->add_option("kind", kind, "Experiment kind")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*run_cmd) return run(config_path, workers, quiet, false);
    if (*transfer_cmd) return run(config_path, workers, quiet, true);
    if (*summarize_cmd) {
      const auto r = mtrl::exp::emit_summary(run_dir);
      std::cout << r.csv.string() << "\n" << r.json.string() << "\n";
      return ok;
    }
    if (*bounds_cmd) return run_bounds(config_path);
    if (*defaults_cmd) {
      std::cout << mtrl::exp::to_json(mtrl::exp::default_config(mtrl::exp::experiment_kind_from_string(kind))).dump(2)
                << "\n";
      return ok;
    }
  } catch (const mtrl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return runtime_failure;
  }
  return ok;
}
