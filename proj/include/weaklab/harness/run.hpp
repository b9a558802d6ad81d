#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weaklab/harness/config.hpp"

namespace weaklab::harness {

inline constexpr const char* kOutDirEnv = "WEAKLAB_OUT_DIR";

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::string task;
  std::vector<std::string> outputs;  // file names relative to the output directory
  double wall_clock_s = 0.0;
  nlohmann::json metrics = nlohmann::json::object();
  bool passed = true;  // false only when a validate task has failing criteria
};

nlohmann::json to_json(const RunManifest& m);

// --out wins, then $WEAKLAB_OUT_DIR, then ./weaklab-out.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag);

// Runs the task and writes its outputs plus config.json and manifest.json.
// Files are staged next to `out_dir` and moved in only after the task
// succeeded; on failure nothing is left behind and the error is rethrown
// with the task name attached.
RunManifest run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace weaklab::harness
