#include "mtrl/exp/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "mtrl/algos/transfer.hpp"
#include "mtrl/envs/tasks.hpp"
#include "mtrl/error.hpp"
#include "mtrl/eval/curves.hpp"
#include "mtrl/eval/evaluate.hpp"
#include "mtrl/eval/oracle.hpp"
#include "mtrl/util/hash.hpp"

namespace mtrl::exp {

namespace fs = std::filesystem;
using nlohmann::json;
using algos::MultiTaskNetwork;
using envs::EnvSpec;
using eval::EpochRecord;
using eval::LearningCurve;
using mtnet::PresetName;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << content;
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string seed_stem(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

// Read-only state shared by all jobs of one run.
struct Context {
  const ExperimentConfig& config;
  std::string hash;
  fs::path out;
  std::vector<EnvSpec> specs;  // selected tasks, config order
  std::vector<std::unique_ptr<eval::QOracle>> oracles;
  std::vector<std::vector<envs::Vector>> probes;

  std::uint64_t global(std::size_t i) const { return static_cast<std::uint64_t>(config.tasks[i]); }
  fs::path arm_dir(const std::string& arm) const { return out / arm; }
  fs::path snapshot_dir(const std::string& arm) const { return out / "snapshots" / arm; }
};

struct Job {
  std::string arm;
  std::uint64_t seed = 0;
  // Produces the job's artifacts; returns their paths.
  std::function<std::vector<fs::path>()> run;
};

LearningCurve new_curve(const Context& ctx, const std::string& arm, const std::vector<std::size_t>& sel,
                        std::uint64_t seed, std::size_t records) {
  LearningCurve c;
  c.algorithm = arm;
  c.suite = ctx.config.suite;
  for (std::size_t i : sel) c.tasks.push_back(ctx.specs[i].name);
  c.seed = seed;
  c.config_hash = ctx.hash;
  c.records.resize(records);
  for (std::size_t k = 0; k < records; ++k) {
    c.records[k].epoch = static_cast<int>(k);
    c.records[k].returns.assign(sel.size(), 0.0);
  }
  return c;
}

std::vector<fs::path> write_curves(const Context& ctx, const LearningCurve& c, bool with_q_error) {
  c.validate();
  std::vector<fs::path> files;
  auto emit = [&](eval::Metric m, const std::string& suffix) {
    std::ostringstream os;
    eval::write_curve_csv_header(os, ctx.hash);
    eval::write_curve_csv(os, c, m);
    const fs::path p = ctx.arm_dir(c.algorithm) / (seed_stem(c.seed) + suffix);
    write_atomic(p, os.str());
    files.push_back(p);
  };
  emit(eval::Metric::discounted_return, "_returns.csv");
  if (with_q_error) emit(eval::Metric::q_error, "_q_error.csv");
  return files;
}

fs::path save_net(const fs::path& path, const MultiTaskNetwork& net) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  mtnet::save_multitask_network(tmp, net);
  fs::rename(tmp, path);
  return path;
}

// ---- fitted Q-iteration arms -------------------------------------------------

std::vector<algos::Transition> dataset_for(const Context& ctx, std::size_t i, std::size_t local, std::uint64_t seed) {
  algos::Rng rng = algos::make_stream(seed, algos::data_stream, ctx.global(i));
  return algos::collect_dataset(ctx.specs[i], local, ctx.config.collect, rng);
}

void fill_fqi_record(const Context& ctx, EpochRecord& r, std::size_t slot, const MultiTaskNetwork& q,
                     std::size_t head, std::size_t i, std::uint64_t seed) {
  const EnvSpec& spec = ctx.specs[i];
  const eval::QFunction qf = [&](const envs::Vector& s) { return q.forward(head, envs::scale_state(spec, s)); };
  r.q_error[slot] = eval::q_l1_error(qf, *ctx.oracles[i], ctx.probes[i]);
  const eval::Policy greedy = [&](const envs::Vector& s) { return envs::Action::discrete(eval::argmax_action(qf(s))); };
  envs::Rng rng = algos::make_stream(seed, algos::eval_stream, ctx.global(i));
  r.returns[slot] = eval::evaluate_greedy(greedy, spec, spec.horizon, rng).mean();
}

LearningCurve fqi_joint(const Context& ctx, const std::string& arm, const std::vector<std::size_t>& sel,
                        std::uint64_t seed) {
  const auto& cfg = ctx.config;
  std::vector<EnvSpec> tasks;
  std::vector<std::vector<algos::Transition>> data;
  for (std::size_t t = 0; t < sel.size(); ++t) {
    tasks.push_back(ctx.specs[sel[t]]);
    data.push_back(dataset_for(ctx, sel[t], t, seed));
  }
  LearningCurve c = new_curve(ctx, arm, sel, seed, static_cast<std::size_t>(cfg.fqi.iterations) + 1);
  for (auto& r : c.records) r.q_error.assign(sel.size(), 0.0);
  algos::Rng init = algos::make_stream(seed, algos::init_stream);
  MultiTaskNetwork net = algos::make_q_network(cfg.preset(PresetName::mfqi), tasks, init);
  algos::Rng fit = algos::make_stream(seed, algos::sample_stream);
  algos::fqi_run(tasks, std::move(data), std::move(net), cfg.fqi, fit, [&](int k, const MultiTaskNetwork& q) {
    for (std::size_t t = 0; t < sel.size(); ++t) fill_fqi_record(ctx, c.records[static_cast<std::size_t>(k)], t, q, t, sel[t], seed);
  });
  return c;
}

LearningCurve fqi_separate(const Context& ctx, const std::string& arm, const std::vector<std::size_t>& sel,
                           std::uint64_t seed) {
  const auto& cfg = ctx.config;
  LearningCurve c = new_curve(ctx, arm, sel, seed, static_cast<std::size_t>(cfg.fqi.iterations) + 1);
  for (auto& r : c.records) r.q_error.assign(sel.size(), 0.0);
  for (std::size_t t = 0; t < sel.size(); ++t) {
    const std::size_t i = sel[t];
    const EnvSpec one[] = {ctx.specs[i]};
    algos::Rng init = algos::make_stream(seed, algos::init_stream, ctx.global(i));
    MultiTaskNetwork net = algos::make_q_network(cfg.preset(PresetName::mfqi), one, init);
    algos::Rng fit = algos::make_stream(seed, algos::sample_stream, ctx.global(i));
    algos::fqi_run(one, {dataset_for(ctx, i, 0, seed)}, std::move(net), cfg.fqi, fit,
                   [&](int k, const MultiTaskNetwork& q) {
                     fill_fqi_record(ctx, c.records[static_cast<std::size_t>(k)], t, q, 0, i, seed);
                   });
  }
  return c;
}

// ---- online arms ------------------------------------------------------------

void merge_task(LearningCurve& c, std::size_t slot, const std::vector<EpochRecord>& records) {
  for (std::size_t k = 0; k < records.size(); ++k) c.records[k].returns[slot] = records[k].returns.at(0);
}

LearningCurve from_records(const Context& ctx, const std::string& arm, const std::vector<std::size_t>& sel,
                           std::uint64_t seed, std::vector<EpochRecord> records) {
  LearningCurve c = new_curve(ctx, arm, sel, seed, 0);
  c.records = std::move(records);
  return c;
}

std::vector<EnvSpec> pick(const Context& ctx, const std::vector<std::size_t>& sel) {
  std::vector<EnvSpec> out;
  for (std::size_t i : sel) out.push_back(ctx.specs[i]);
  return out;
}

std::vector<std::size_t> all_indices(const Context& ctx) {
  std::vector<std::size_t> sel(ctx.specs.size());
  for (std::size_t i = 0; i < sel.size(); ++i) sel[i] = i;
  return sel;
}

std::size_t target_index(const Context& ctx) {
  const auto& t = ctx.config.tasks;
  return static_cast<std::size_t>(std::find(t.begin(), t.end(), ctx.config.transfer.target_task) - t.begin());
}

std::vector<std::size_t> source_indices(const Context& ctx) {
  std::vector<std::size_t> sel;
  for (std::size_t i = 0; i < ctx.specs.size(); ++i)
    if (i != target_index(ctx)) sel.push_back(i);
  return sel;
}

std::vector<fs::path> dqn_joint(const Context& ctx, const std::string& arm, const std::vector<std::size_t>& sel,
                                std::uint64_t seed) {
  const auto tasks = pick(ctx, sel);
  algos::Rng init = algos::make_stream(seed, algos::init_stream);
  auto res = algos::dqn_train(tasks, algos::make_q_network(ctx.config.preset(PresetName::mdqn_q), tasks, init),
                              ctx.config.dqn, seed);
  auto files = write_curves(ctx, from_records(ctx, arm, sel, seed, std::move(res.records)), false);
  files.push_back(save_net(ctx.snapshot_dir(arm) / (seed_stem(seed) + ".net"), res.net));
  return files;
}

std::vector<fs::path> dqn_separate(const Context& ctx, const std::string& arm, std::uint64_t seed) {
  const auto sel = all_indices(ctx);
  LearningCurve c = new_curve(ctx, arm, sel, seed, static_cast<std::size_t>(ctx.config.dqn.epochs) + 1);
  for (std::size_t i : sel) {
    const EnvSpec one[] = {ctx.specs[i]};
    algos::Rng init = algos::make_stream(seed, algos::init_stream, ctx.global(i));
    auto res = algos::dqn_train(one, algos::make_q_network(ctx.config.preset(PresetName::mdqn_q), one, init),
                                ctx.config.dqn, seed);
    merge_task(c, i, res.records);
  }
  return write_curves(ctx, c, false);
}

std::vector<fs::path> ddpg_joint(const Context& ctx, const std::string& arm, const std::vector<std::size_t>& sel,
                                 std::uint64_t seed) {
  const auto tasks = pick(ctx, sel);
  algos::Rng init = algos::make_stream(seed, algos::init_stream);
  auto actor = algos::make_actor(ctx.config.preset(PresetName::mddpg_actor), tasks, init);
  auto critic = algos::make_critic(ctx.config.preset(PresetName::mddpg_critic), tasks, init);
  auto res = algos::ddpg_train(tasks, std::move(actor), std::move(critic), ctx.config.ddpg, seed);
  auto files = write_curves(ctx, from_records(ctx, arm, sel, seed, std::move(res.records)), false);
  files.push_back(save_net(ctx.snapshot_dir(arm) / (seed_stem(seed) + "_actor.net"), res.actor));
  files.push_back(save_net(ctx.snapshot_dir(arm) / (seed_stem(seed) + "_critic.net"), res.critic));
  return files;
}

std::vector<fs::path> ddpg_separate(const Context& ctx, const std::string& arm, std::uint64_t seed) {
  const auto sel = all_indices(ctx);
  LearningCurve c = new_curve(ctx, arm, sel, seed, static_cast<std::size_t>(ctx.config.ddpg.epochs) + 1);
  for (std::size_t i : sel) {
    const EnvSpec one[] = {ctx.specs[i]};
    algos::Rng init = algos::make_stream(seed, algos::init_stream, ctx.global(i));
    auto actor = algos::make_actor(ctx.config.preset(PresetName::mddpg_actor), one, init);
    auto critic = algos::make_critic(ctx.config.preset(PresetName::mddpg_critic), one, init);
    auto res = algos::ddpg_train(one, std::move(actor), std::move(critic), ctx.config.ddpg, seed);
    merge_task(c, i, res.records);
  }
  return write_curves(ctx, c, false);
}

fs::path resolve_snapshot(const fs::path& configured, const fs::path& pretrained_dir, std::uint64_t seed,
                          const std::string& suffix) {
  const std::string name = seed_stem(seed) + suffix + ".net";
  if (configured.empty()) return pretrained_dir / name;
  if (fs::is_directory(configured)) return configured / name;
  return configured;
}

// ---- jobs ---------------------------------------------------------------------

std::vector<std::vector<Job>> plan(const Context& ctx) {
  const auto& cfg = ctx.config;
  std::vector<std::vector<Job>> phases(2);
  const auto all = all_indices(ctx);
  for (std::uint64_t seed : cfg.seeds) {
    switch (cfg.kind) {
      case ExperimentKind::mfqi_compare:
        phases[0].push_back({"mfqi", seed, [&ctx, all, seed] { return write_curves(ctx, fqi_joint(ctx, "mfqi", all, seed), true); }});
        phases[0].push_back({"fqi", seed, [&ctx, all, seed] { return write_curves(ctx, fqi_separate(ctx, "fqi", all, seed), true); }});
        break;
      case ExperimentKind::mfqi_task_scaling:
        for (int n : cfg.task_counts) {
          const std::string arm = "mfqi_T" + std::to_string(n);
          const std::vector<std::size_t> sel(all.begin(), all.begin() + n);
          phases[0].push_back({arm, seed, [&ctx, arm, sel, seed] { return write_curves(ctx, fqi_joint(ctx, arm, sel, seed), true); }});
        }
        break;
      case ExperimentKind::mdqn_compare:
        phases[0].push_back({"mdqn", seed, [&ctx, all, seed] { return dqn_joint(ctx, "mdqn", all, seed); }});
        phases[0].push_back({"dqn", seed, [&ctx, seed] { return dqn_separate(ctx, "dqn", seed); }});
        break;
      case ExperimentKind::mddpg_compare:
        phases[0].push_back({"mddpg", seed, [&ctx, all, seed] { return ddpg_joint(ctx, "mddpg", all, seed); }});
        phases[0].push_back({"ddpg", seed, [&ctx, seed] { return ddpg_separate(ctx, "ddpg", seed); }});
        break;
      case ExperimentKind::mdqn_transfer:
      case ExperimentKind::mddpg_transfer: {
        const bool dqn = cfg.kind == ExperimentKind::mdqn_transfer;
        const bool pretrain = dqn ? cfg.transfer.snapshot.empty() : cfg.transfer.actor_snapshot.empty();
        if (pretrain) {
          const auto src = source_indices(ctx);
          phases[0].push_back({"pretrain", seed, [&ctx, src, seed, dqn] {
                                 return dqn ? dqn_joint(ctx, "pretrain", src, seed) : ddpg_joint(ctx, "pretrain", src, seed);
                               }});
        }
        for (const auto& mode : cfg.transfer.modes) {
          const std::string arm = mode.to_string();
          phases[1].push_back({arm, seed, [&ctx, arm, mode, seed, dqn] {
                                 const std::size_t ti = target_index(ctx);
                                 const EnvSpec& target = ctx.specs[ti];
                                 const fs::path pre = ctx.snapshot_dir("pretrain");
                                 const auto& tc = ctx.config.transfer;
                                 std::vector<EpochRecord> records;
                                 if (dqn) {
                                   records = algos::run_transfer(resolve_snapshot(tc.snapshot, pre, seed, ""), target, mode,
                                                                 ctx.config.preset(PresetName::mdqn_q), ctx.config.dqn, seed)
                                                 .records;
                                 } else {
                                   records = algos::run_transfer_ddpg(resolve_snapshot(tc.actor_snapshot, pre, seed, "_actor"),
                                                                      resolve_snapshot(tc.critic_snapshot, pre, seed, "_critic"),
                                                                      target, mode, ctx.config.preset(PresetName::mddpg_actor),
                                                                      ctx.config.preset(PresetName::mddpg_critic), ctx.config.ddpg, seed)
                                                 .records;
                                 }
                                 return write_curves(ctx, from_records(ctx, arm, {ti}, seed, std::move(records)), false);
                               }});
        }
        break;
      }
      case ExperimentKind::bounds_eval: break;
    }
  }
  return phases;
}

json artifact_entry(const fs::path& out, const fs::path& p) {
  return {{"path", fs::relative(p, out).generic_string()}, {"sha256", util::sha256_file(p)}};
}

// A job is complete when its record names this config and every artifact
// still has the recorded content.
bool job_complete(const Context& ctx, const fs::path& record) {
  if (!fs::exists(record)) return false;
  try {
    std::ifstream in(record);
    const json j = json::parse(in);
    if (j.at("config_hash") != ctx.hash) return false;
    for (const auto& a : j.at("artifacts")) {
      const fs::path p = ctx.out / a.at("path").get<std::string>();
      if (!fs::exists(p) || util::sha256_file(p) != a.at("sha256").get<std::string>()) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

fs::path record_path(const Context& ctx, const Job& job) { return ctx.arm_dir(job.arm) / (seed_stem(job.seed) + ".json"); }

void run_pool(std::vector<Job>& jobs, int workers, const std::function<void(Job&)>& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex m;
  auto worker = [&] {
    for (;;) {
      {
        std::lock_guard lock(m);
        if (error) return;
      }
      const std::size_t i = next++;
      if (i >= jobs.size()) return;
      try {
        fn(jobs[i]);
      } catch (...) {
        std::lock_guard lock(m);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(workers), jobs.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

void check_output_dir(const Context& ctx) {
  const fs::path existing = ctx.out / "config.json";
  if (!fs::exists(existing)) return;
  std::ifstream in(existing);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception&) {
    throw ConfigError("output directory " + ctx.out.string() + " holds an unreadable config.json");
  }
  const std::string other = j.value("config_hash", "");
  if (other != ctx.hash) {
    throw ConfigError("output directory " + ctx.out.string() + " holds a run with config hash " + other +
                      "; this config hashes to " + ctx.hash);
  }
}

}  // namespace

int resolve_workers(int configured) {
  int n = std::max(1, configured);
  if (const char* cap = std::getenv("MTRL_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end == cap || *end != '\0' || v < 1) throw ConfigError("MTRL_WORKERS must be a positive integer");
    n = std::min<long>(n, v);
  }
  return n;
}

std::vector<std::string> experiment_arms(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::mfqi_compare: return {"mfqi", "fqi"};
    case ExperimentKind::mfqi_task_scaling: {
      std::vector<std::string> arms;
      for (int n : config.task_counts) arms.push_back("mfqi_T" + std::to_string(n));
      return arms;
    }
    case ExperimentKind::mdqn_compare: return {"mdqn", "dqn"};
    case ExperimentKind::mddpg_compare: return {"mddpg", "ddpg"};
    case ExperimentKind::mdqn_transfer:
    case ExperimentKind::mddpg_transfer: {
      std::vector<std::string> arms;
      for (const auto& m : config.transfer.modes) arms.push_back(m.to_string());
      return arms;
    }
    case ExperimentKind::bounds_eval: return {};
  }
  return {};
}

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const auto t0 = Clock::now();
  Context ctx{config, config_hash(config), config.output_dir, {}, {}, {}};
  check_output_dir(ctx);
  fs::create_directories(ctx.out);
  json cfg_json = to_json(config);
  cfg_json["config_hash"] = ctx.hash;
  write_atomic(ctx.out / "config.json", cfg_json.dump(2) + "\n");

  RunReport report;
  report.config_hash = ctx.hash;
  std::vector<fs::path> artifacts{ctx.out / "config.json"};
  json jobs_json = json::array();

  if (config.kind == ExperimentKind::bounds_eval) {
    write_atomic(ctx.out / "bounds.csv", bounds::bounds_csv(*config.bounds));
    artifacts.push_back(ctx.out / "bounds.csv");
    report.jobs_run = 1;
  } else {
    ctx.specs = config.selected_tasks();
    if (config.kind == ExperimentKind::mfqi_compare || config.kind == ExperimentKind::mfqi_task_scaling) {
      for (const auto& spec : ctx.specs) {
        eval::OracleOptions o;
        o.resolution = config.oracle.resolution;
        if (o.resolution.empty()) o.resolution.assign(static_cast<std::size_t>(spec.state_dim), 200);
        o.tolerance = config.oracle.tolerance;
        ctx.oracles.push_back(std::make_unique<eval::QOracle>(spec, o));
        ctx.probes.push_back(eval::sample_probe_states(spec, config.oracle.probes, config.oracle.probe_seed));
      }
    }
    const int workers = resolve_workers(config.workers);
    std::mutex log_mutex;
    for (auto& phase : plan(ctx)) {
      run_pool(phase, workers, [&](Job& job) {
        const fs::path record = record_path(ctx, job);
        if (job_complete(ctx, record)) {
          std::lock_guard lock(log_mutex);
          ++report.jobs_skipped;
          if (options.log) *options.log << "[" << job.arm << " seed " << job.seed << "] already complete\n";
          return;
        }
        const auto start = Clock::now();
        const auto files = job.run();
        json r;
        r["arm"] = job.arm;
        r["seed"] = job.seed;
        r["config_hash"] = ctx.hash;
        r["wall_clock_seconds"] = seconds_since(start);
        r["artifacts"] = json::array();
        for (const auto& f : files) r["artifacts"].push_back(artifact_entry(ctx.out, f));
        write_atomic(record, r.dump(2) + "\n");
        std::lock_guard lock(log_mutex);
        ++report.jobs_run;
        if (options.log) {
          *options.log << "[" << job.arm << " seed " << job.seed << "] done in " << r["wall_clock_seconds"].get<double>()
                       << " s\n";
        }
      });
      for (const auto& job : phase) {
        std::ifstream in(record_path(ctx, job));
        json r = json::parse(in);
        for (const auto& a : r["artifacts"]) artifacts.push_back(ctx.out / a["path"].get<std::string>());
        artifacts.push_back(record_path(ctx, job));
        jobs_json.push_back(std::move(r));
      }
    }
  }

  report.wall_clock_seconds = seconds_since(t0);
  json manifest;
  manifest["config_hash"] = ctx.hash;
  manifest["kind"] = std::string(to_string(config.kind));
  manifest["seeds"] = config.seeds;
  manifest["wall_clock_seconds"] = report.wall_clock_seconds;
  manifest["jobs_run"] = report.jobs_run;
  manifest["jobs_skipped"] = report.jobs_skipped;
  manifest["jobs"] = jobs_json;
  manifest["artifacts"] = json::array();
  for (const auto& p : artifacts) manifest["artifacts"].push_back(artifact_entry(ctx.out, p));
  report.manifest = ctx.out / "manifest.json";
  write_atomic(report.manifest, manifest.dump(2) + "\n");
  return report;
}

}  // namespace mtrl::exp
