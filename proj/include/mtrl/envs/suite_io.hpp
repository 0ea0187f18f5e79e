#pragma once

#include <filesystem>
#include <vector>

#include "json.hpp"

#include "mtrl/envs/env.hpp"

namespace mtrl::envs {

nlohmann::json to_json(const EnvSpec& spec);
EnvSpec env_spec_from_json(const nlohmann::json& j);

// {"schema_version": 1, "tasks": [...]}
nlohmann::json suite_to_json(const std::vector<EnvSpec>& suite);
std::vector<EnvSpec> suite_from_json(const nlohmann::json& j);

void save_suite(const std::filesystem::path& path, const std::vector<EnvSpec>& suite);
std::vector<EnvSpec> load_suite(const std::filesystem::path& path);

}  // namespace mtrl::envs
