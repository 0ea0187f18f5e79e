#include "mtrl/exp/config.hpp"

#include <fstream>
#include <set>

#include "mtrl/envs/tasks.hpp"
#include "mtrl/error.hpp"
#include "mtrl/util/hash.hpp"

namespace mtrl::exp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config: field '" + field + "': " + what);
}

void read(const json& j, const std::string& f, double& out) {
  if (!j.is_number()) fail(f, "expected a number");
  out = j.get<double>();
}

void read(const json& j, const std::string& f, std::string& out) {
  if (!j.is_string()) fail(f, "expected a string");
  out = j.get<std::string>();
}

void read(const json& j, const std::string& f, std::filesystem::path& out) {
  std::string s;
  read(j, f, s);
  out = s;
}

template <class I>
  requires std::is_integral_v<I>
void read(const json& j, const std::string& f, I& out) {
  if (!j.is_number_integer()) fail(f, "expected an integer");
  if constexpr (std::is_unsigned_v<I>) {
    if (j.is_number_unsigned()) {
      out = j.get<I>();
      return;
    }
    if (j.get<std::int64_t>() < 0) fail(f, "must be non-negative");
  }
  out = static_cast<I>(j.get<std::int64_t>());
}

template <class T>
void read(const json& j, const std::string& f, std::vector<T>& out) {
  if (!j.is_array()) fail(f, "expected a list");
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    T v{};
    read(j[i], f + "[" + std::to_string(i) + "]", v);
    out.push_back(v);
  }
}

// Walks one JSON object, remembering which keys were used.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <class T>
  bool get(const char* key, T& out) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return false;
    read(*it, name(key), out);
    return true;
  }

  const json* sub(const char* key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(name(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_loss(Fields& f, nn::LossSpec& loss) {
  const json* j = f.sub("loss");
  if (!j) return;
  Fields l(*j, f.name("loss"));
  std::string kind;
  if (l.get("kind", kind)) {
    try {
      loss.kind = nn::loss_kind_from_string(kind);
    } catch (const ConfigError&) {
      fail(l.name("kind"), "expected mse or huber");
    }
  }
  l.get("huber_delta", loss.huber_delta);
  l.finish();
}

json loss_json(const nn::LossSpec& loss) {
  return {{"kind", std::string(nn::to_string(loss.kind))}, {"huber_delta", loss.huber_delta}};
}

std::vector<std::uint64_t> default_seeds(std::size_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

}  // namespace

ExperimentKind experiment_kind_from_string(std::string_view name) {
  for (auto k : {ExperimentKind::mfqi_compare, ExperimentKind::mfqi_task_scaling, ExperimentKind::mdqn_compare,
                 ExperimentKind::mdqn_transfer, ExperimentKind::mddpg_compare, ExperimentKind::mddpg_transfer,
                 ExperimentKind::bounds_eval}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::mfqi_compare: return "mfqi_compare";
    case ExperimentKind::mfqi_task_scaling: return "mfqi_task_scaling";
    case ExperimentKind::mdqn_compare: return "mdqn_compare";
    case ExperimentKind::mdqn_transfer: return "mdqn_transfer";
    case ExperimentKind::mddpg_compare: return "mddpg_compare";
    case ExperimentKind::mddpg_transfer: return "mddpg_transfer";
    case ExperimentKind::bounds_eval: return "bounds_eval";
  }
  return "?";
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.seeds = default_seeds(20);
  c.output_dir = std::filesystem::path("runs") / std::string(to_string(kind));
  switch (kind) {
    case ExperimentKind::mfqi_compare:
      c.suite = "car_on_hill_8";
      c.tasks = {1, 2, 3, 4};
      break;
    case ExperimentKind::mfqi_task_scaling:
      c.suite = "car_on_hill_8";
      c.tasks = {1, 2, 3, 4, 5, 6, 7, 8};
      break;
    case ExperimentKind::mdqn_compare:
      c.suite = "mdqn_5";
      c.tasks = {1, 2, 3, 4, 5};
      break;
    case ExperimentKind::mdqn_transfer:
      c.suite = "mdqn_5";
      c.tasks = {1, 2, 3, 4, 5};
      c.transfer.target_task = 2;
      c.transfer.modes = {algos::TransferMode::parse("scratch"), algos::TransferMode::parse("unfreeze_0"),
                          algos::TransferMode::parse("no_unfreeze"), algos::TransferMode::parse("unfreeze_at(10)")};
      break;
    case ExperimentKind::mddpg_compare:
      c.suite = "pendulum_family_3";
      c.tasks = {1, 2, 3};
      break;
    case ExperimentKind::mddpg_transfer:
      c.suite = "pendulum_family_3";
      c.tasks = {1, 2, 3};
      c.transfer.target_task = 1;
      c.transfer.modes = {algos::TransferMode::parse("scratch"), algos::TransferMode::parse("unfreeze_0"),
                          algos::TransferMode::parse("no_unfreeze")};
      break;
    case ExperimentKind::bounds_eval:
      c.seeds.clear();
      break;
  }
  return c;
}

std::vector<envs::EnvSpec> ExperimentConfig::selected_tasks() const {
  const auto all = envs::make_task_suite(suite);
  std::vector<envs::EnvSpec> out;
  for (int t : tasks) {
    if (t < 1 || static_cast<std::size_t>(t) > all.size()) {
      throw ConfigError("config: field 'tasks': index " + std::to_string(t) + " outside 1.." +
                        std::to_string(all.size()) + " of suite " + suite);
    }
    out.push_back(all[static_cast<std::size_t>(t - 1)]);
  }
  return out;
}

mtnet::ArchitecturePreset ExperimentConfig::preset(mtnet::PresetName name) const {
  auto p = mtnet::make_preset(name);
  auto it = networks.find(std::string(mtnet::to_string(name)));
  if (it == networks.end()) return p;
  return mtnet::resize_preset(p, it->second.input_width, it->second.shared_widths);
}

void ExperimentConfig::validate() const {
  if (schema_version != current_schema) {
    fail("schema_version", "unsupported version " + std::to_string(schema_version) + " (expected " +
                               std::to_string(current_schema) + ")");
  }
  if (workers < 1) fail("workers", "must be at least 1");
  if (kind == ExperimentKind::bounds_eval) {
    if (!bounds) fail("bounds", "required for bounds_eval");
    bounds->validate();
    return;
  }
  if (seeds.empty()) fail("seeds", "at least one seed required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) fail("seeds", "duplicate seed");
  if (tasks.empty()) fail("tasks", "at least one task required");
  const auto specs = selected_tasks();

  for (const auto& [name, w] : networks) {
    try {
      preset(mtnet::preset_from_string(name));
    } catch (const ConfigError& e) {
      fail("networks." + name, e.what());
    }
  }

  switch (kind) {
    case ExperimentKind::mfqi_compare:
    case ExperimentKind::mfqi_task_scaling:
      if (fqi.iterations < 0) fail("fqi.iterations", "must be non-negative");
      if (fqi.epochs_per_iteration < 1) fail("fqi.epochs_per_iteration", "must be positive");
      if (!(fqi.lr >= 0.0)) fail("fqi.lr", "must be non-negative");
      if (collect.transitions == 0) fail("collect.transitions", "must be positive");
      if (!(collect.random_fraction >= 0.0 && collect.random_fraction <= 1.0)) fail("collect.random_fraction", "must lie in [0, 1]");
      if (!(collect.epsilon >= 0.0 && collect.epsilon <= 1.0)) fail("collect.epsilon", "must lie in [0, 1]");
      if (collect.coarse_resolution < 2) fail("collect.coarse_resolution", "must be at least 2");
      if (oracle.probes == 0) fail("oracle.probes", "must be positive");
      for (const auto& s : specs) {
        if (!s.actions.discrete() || !s.deterministic) fail("suite", s.name + " has no exact value-iteration oracle");
        if (!oracle.resolution.empty() && oracle.resolution.size() != static_cast<std::size_t>(s.state_dim)) {
          fail("oracle.resolution", "one entry per state dimension required");
        }
      }
      if (kind == ExperimentKind::mfqi_task_scaling) {
        if (task_counts.empty()) fail("task_counts", "at least one entry required");
        for (int n : task_counts) {
          if (n < 1 || static_cast<std::size_t>(n) > tasks.size()) fail("task_counts", "entries must lie in 1..#tasks");
        }
      }
      break;
    case ExperimentKind::mdqn_compare:
    case ExperimentKind::mdqn_transfer:
      try {
        dqn.validate();
      } catch (const ConfigError& e) {
        fail("dqn", e.what());
      }
      for (const auto& s : specs)
        if (!s.actions.discrete()) fail("suite", s.name + " has continuous actions");
      break;
    case ExperimentKind::mddpg_compare:
    case ExperimentKind::mddpg_transfer:
      try {
        ddpg.validate();
      } catch (const ConfigError& e) {
        fail("ddpg", e.what());
      }
      for (const auto& s : specs)
        if (s.actions.discrete()) fail("suite", s.name + " has discrete actions");
      break;
    case ExperimentKind::bounds_eval: break;
  }
  if (kind == ExperimentKind::mdqn_transfer || kind == ExperimentKind::mddpg_transfer) {
    if (std::find(tasks.begin(), tasks.end(), transfer.target_task) == tasks.end()) {
      fail("transfer.target_task", "must be one of the selected tasks");
    }
    if (transfer.snapshot.empty() && tasks.size() < 2) fail("tasks", "pretraining needs at least one source task");
    if (transfer.modes.empty()) fail("transfer.modes", "at least one mode required");
    if (kind == ExperimentKind::mddpg_transfer && transfer.actor_snapshot.empty() != transfer.critic_snapshot.empty()) {
      fail("transfer", "actor_snapshot and critic_snapshot go together");
    }
  }
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) fail("<root>", "expected an object");
  auto kind_it = j.find("kind");
  if (kind_it == j.end()) fail("kind", "required");
  std::string kind_name;
  read(*kind_it, "kind", kind_name);
  ExperimentConfig c;
  try {
    c = default_config(experiment_kind_from_string(kind_name));
  } catch (const ConfigError&) {
    fail("kind", "unknown experiment kind '" + kind_name + "'");
  }

  Fields f(j, "");
  f.sub("kind");
  if (!f.get("schema_version", c.schema_version)) fail("schema_version", "required");
  f.get("suite", c.suite);
  f.get("tasks", c.tasks);
  f.get("seeds", c.seeds);
  f.get("output_dir", c.output_dir);
  f.get("workers", c.workers);
  f.get("task_counts", c.task_counts);

  if (const json* s = f.sub("fqi")) {
    Fields g(*s, "fqi");
    g.get("iterations", c.fqi.iterations);
    g.get("epochs_per_iteration", c.fqi.epochs_per_iteration);
    g.get("minibatch_per_task", c.fqi.minibatch_per_task);
    g.get("lr", c.fqi.lr);
    read_loss(g, c.fqi.loss);
    g.finish();
  }
  if (const json* s = f.sub("collect")) {
    Fields g(*s, "collect");
    g.get("transitions", c.collect.transitions);
    g.get("random_fraction", c.collect.random_fraction);
    g.get("epsilon", c.collect.epsilon);
    g.get("coarse_resolution", c.collect.coarse_resolution);
    g.finish();
  }
  if (const json* s = f.sub("oracle")) {
    Fields g(*s, "oracle");
    g.get("resolution", c.oracle.resolution);
    g.get("tolerance", c.oracle.tolerance);
    g.get("probes", c.oracle.probes);
    g.get("probe_seed", c.oracle.probe_seed);
    g.finish();
  }
  if (const json* s = f.sub("dqn")) {
    Fields g(*s, "dqn");
    auto& d = c.dqn;
    g.get("epochs", d.epochs);
    g.get("steps_per_epoch", d.steps_per_epoch);
    g.get("eval_steps", d.eval_steps);
    g.get("batch_per_task", d.batch_per_task);
    g.get("capacity", d.capacity);
    g.get("warmup", d.warmup);
    g.get("lr", d.lr);
    g.get("target_update", d.target_update);
    g.get("epsilon_start", d.epsilon.start);
    g.get("epsilon_end", d.epsilon.end);
    g.get("epsilon_decay_steps", d.epsilon.decay_steps);
    read_loss(g, d.loss);
    g.finish();
  }
  if (const json* s = f.sub("ddpg")) {
    Fields g(*s, "ddpg");
    auto& d = c.ddpg;
    g.get("epochs", d.epochs);
    g.get("steps_per_epoch", d.steps_per_epoch);
    g.get("eval_steps", d.eval_steps);
    g.get("batch_per_task", d.batch_per_task);
    g.get("capacity", d.capacity);
    g.get("warmup", d.warmup);
    g.get("actor_lr", d.actor_lr);
    g.get("critic_lr", d.critic_lr);
    g.get("critic_l2", d.critic_l2);
    g.get("tau", d.tau);
    g.get("ou_theta", d.ou_theta);
    g.get("ou_sigma", d.ou_sigma);
    read_loss(g, d.loss);
    g.finish();
  }
  if (const json* s = f.sub("networks")) {
    if (!s->is_object()) fail("networks", "expected an object");
    c.networks.clear();
    for (auto it = s->begin(); it != s->end(); ++it) {
      Fields g(it.value(), "networks." + it.key());
      NetworkWidths w;
      g.get("input_width", w.input_width);
      if (!g.get("shared_widths", w.shared_widths)) fail(g.name("shared_widths"), "required");
      g.finish();
      c.networks[it.key()] = w;
    }
  }
  if (const json* s = f.sub("transfer")) {
    Fields g(*s, "transfer");
    g.get("target_task", c.transfer.target_task);
    std::vector<std::string> modes;
    if (g.get("modes", modes)) {
      c.transfer.modes.clear();
      for (std::size_t i = 0; i < modes.size(); ++i) {
        try {
          c.transfer.modes.push_back(algos::TransferMode::parse(modes[i]));
        } catch (const ConfigError& e) {
          fail("transfer.modes[" + std::to_string(i) + "]", e.what());
        }
      }
    }
    g.get("snapshot", c.transfer.snapshot);
    g.get("actor_snapshot", c.transfer.actor_snapshot);
    g.get("critic_snapshot", c.transfer.critic_snapshot);
    g.finish();
  }
  if (const json* s = f.sub("bounds")) {
    try {
      c.bounds = bounds::bound_inputs_from_json(*s);
    } catch (const ConfigError& e) {
      fail("bounds", e.what());
    } catch (const json::exception& e) {
      fail("bounds", e.what());
    }
  }
  f.finish();
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["kind"] = std::string(to_string(c.kind));
  j["suite"] = c.suite;
  j["tasks"] = c.tasks;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir.string();
  j["workers"] = c.workers;
  j["task_counts"] = c.task_counts;
  j["fqi"] = {{"iterations", c.fqi.iterations},
              {"epochs_per_iteration", c.fqi.epochs_per_iteration},
              {"minibatch_per_task", c.fqi.minibatch_per_task},
              {"lr", c.fqi.lr},
              {"loss", loss_json(c.fqi.loss)}};
  j["collect"] = {{"transitions", c.collect.transitions},
                  {"random_fraction", c.collect.random_fraction},
                  {"epsilon", c.collect.epsilon},
                  {"coarse_resolution", c.collect.coarse_resolution}};
  j["oracle"] = {{"resolution", c.oracle.resolution},
                 {"tolerance", c.oracle.tolerance},
                 {"probes", c.oracle.probes},
                 {"probe_seed", c.oracle.probe_seed}};
  const auto& d = c.dqn;
  j["dqn"] = {{"epochs", d.epochs},
              {"steps_per_epoch", d.steps_per_epoch},
              {"eval_steps", d.eval_steps},
              {"batch_per_task", d.batch_per_task},
              {"capacity", d.capacity},
              {"warmup", d.warmup},
              {"lr", d.lr},
              {"target_update", d.target_update},
              {"epsilon_start", d.epsilon.start},
              {"epsilon_end", d.epsilon.end},
              {"epsilon_decay_steps", d.epsilon.decay_steps},
              {"loss", loss_json(d.loss)}};
  const auto& p = c.ddpg;
  j["ddpg"] = {{"epochs", p.epochs},
               {"steps_per_epoch", p.steps_per_epoch},
               {"eval_steps", p.eval_steps},
               {"batch_per_task", p.batch_per_task},
               {"capacity", p.capacity},
               {"warmup", p.warmup},
               {"actor_lr", p.actor_lr},
               {"critic_lr", p.critic_lr},
               {"critic_l2", p.critic_l2},
               {"tau", p.tau},
               {"ou_theta", p.ou_theta},
               {"ou_sigma", p.ou_sigma},
               {"loss", loss_json(p.loss)}};
  j["networks"] = json::object();
  for (const auto& [name, w] : c.networks) {
    j["networks"][name] = {{"input_width", w.input_width}, {"shared_widths", w.shared_widths}};
  }
  std::vector<std::string> modes;
  for (const auto& m : c.transfer.modes) modes.push_back(m.to_string());
  j["transfer"] = {{"target_task", c.transfer.target_task},
                   {"modes", modes},
                   {"snapshot", c.transfer.snapshot.string()},
                   {"actor_snapshot", c.transfer.actor_snapshot.string()},
                   {"critic_snapshot", c.transfer.critic_snapshot.string()}};
  if (c.bounds) j["bounds"] = bounds::to_json(*c.bounds);
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  j.erase("workers");
  j.erase("seeds");  // (config, seed) fixes a run; adding seeds keeps earlier ones resumable
  return util::sha256_hex(j.dump());
}

}  // namespace mtrl::exp
