#pragma once

#include <filesystem>
#include <memory>

#include "rift/policy.hpp"

namespace rift {

/// Policy checkpoints are single JSON files: {version, family, config, vocab,
/// params}. The version field gates future format changes.
void save_checkpoint(const Policy& policy, const std::filesystem::path& path);

std::unique_ptr<Policy> load_checkpoint(const std::filesystem::path& path);
std::unique_ptr<Policy> policy_from_json(const nlohmann::json& j);

}  // namespace rift
