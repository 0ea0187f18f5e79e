#include "mtrl/envs/suite_io.hpp"

#include <fstream>
#include <stdexcept>

#include "mtrl/error.hpp"

namespace mtrl::envs {

namespace {

nlohmann::json vector_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::json to_json(const EnvSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["kind"] = std::string(to_string(spec.kind));
  j["state_dim"] = spec.state_dim;
  if (spec.actions.discrete()) {
    j["actions"] = {{"discrete", spec.actions.values}};
  } else {
    j["actions"] = {{"low", vector_json(spec.actions.low)}, {"high", vector_json(spec.actions.high)}};
  }
  j["gamma"] = spec.gamma;
  j["horizon"] = spec.horizon;
  j["state_low"] = vector_json(spec.state_low);
  j["state_high"] = vector_json(spec.state_high);
  j["deterministic"] = spec.deterministic;
  j["parameters"] = spec.parameters;
  return j;
}

EnvSpec env_spec_from_json(const nlohmann::json& j) {
  try {
    EnvSpec s;
    s.name = j.at("name").get<std::string>();
    s.kind = env_kind_from_string(j.at("kind").get<std::string>());
    s.state_dim = j.at("state_dim").get<Eigen::Index>();
    const auto& a = j.at("actions");
    if (a.contains("discrete")) {
      s.actions.values = a.at("discrete").get<std::vector<double>>();
      if (s.actions.values.empty()) throw ConfigError(s.name + ": empty discrete action list");
    } else {
      s.actions.low = vector_from(a.at("low"));
      s.actions.high = vector_from(a.at("high"));
    }
    s.gamma = j.at("gamma").get<double>();
    s.horizon = j.at("horizon").get<int>();
    if (!(s.gamma > 0.0 && s.gamma <= 1.0)) throw ConfigError(s.name + ": gamma outside (0, 1]");
    if (s.horizon <= 0) throw ConfigError(s.name + ": horizon must be positive");
    s.state_low = vector_from(j.at("state_low"));
    s.state_high = vector_from(j.at("state_high"));
    s.deterministic = j.value("deterministic", true);
    s.parameters = j.at("parameters").get<std::map<std::string, double>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("task definition: ") + e.what());
  }
}

nlohmann::json suite_to_json(const std::vector<EnvSpec>& suite) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& s : suite) tasks.push_back(to_json(s));
  return {{"schema_version", 1}, {"tasks", tasks}};
}

std::vector<EnvSpec> suite_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != 1) throw ConfigError("task suite: unsupported schema_version");
  std::vector<EnvSpec> suite;
  for (const auto& t : j.at("tasks")) suite.push_back(env_spec_from_json(t));
  return suite;
}

void save_suite(const std::filesystem::path& path, const std::vector<EnvSpec>& suite) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << suite_to_json(suite).dump(2) << '\n';
}

std::vector<EnvSpec> load_suite(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return suite_from_json(nlohmann::json::parse(is));
}

}  // namespace mtrl::envs
