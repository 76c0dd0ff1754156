#pragma once

// Scene-driven certification commands and their JSON reports.  `run` is the
// whole command line minus argument parsing, so tests can drive it
// in-process.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdp/scene.hpp"

namespace sdp {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kPass = 0, kVerdictFailure = 1, kSceneError = 2, kDomainFailure = 3 };

struct RunOptions {
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::map<std::string, double> tolerances;  // override scene and defaults
  int order = 3;
  int threads = 1;
  SceneParams params;
  bool wall_time = true;
};

struct RunResult {
  int exit_code = kPass;
  nlohmann::ordered_json report;
};

const std::vector<std::string>& command_names();

RunResult run(const std::string& command, const std::filesystem::path& scene, const RunOptions& options = {});

/// Pretty-printed report with a trailing newline.
std::string render(const nlohmann::ordered_json& report);

}  // namespace sdp
