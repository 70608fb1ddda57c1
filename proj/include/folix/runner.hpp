#pragma once

// Scenario orchestration behind the folix CLI. Each command reads a config,
// writes its artifacts under the output directory and finishes with
// manifest.json.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "folix/config.hpp"
#include "folix/io.hpp"

namespace folix {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCertification = 3;
inline constexpr int kExitVerdict = 4;  // egorov ran, verdict is fail

struct RunRequest {
  std::string command;  // geometry-check | flow | reduced-flow | spectrum | transport | egorov
  std::string config_path;
  std::optional<double> t;
  std::optional<std::string> points;
  std::optional<std::string> bands;  // "4:8,8:16"
  std::optional<std::string> out;
};

struct RunResult {
  int status = kExitOk;
  std::vector<fs::path> artifacts;
  nlohmann::json manifest;
  nlohmann::json summary;  // command-specific headline numbers
};

// Parses "lo:hi,lo:hi"; ConfigError at /bands on bad syntax.
std::vector<BandSpec> parse_band_list(const std::string& s);

// Applies the flag overrides to a parsed config (ConfigError on bad values).
ScenarioConfig resolve(const RunRequest& req);

// Runs one command on a resolved config; throws on failure.
RunResult execute(const std::string& command, const ScenarioConfig& config);

// Catches everything and maps it to an exit status, reporting on `err`
// (config errors as one JSON line with the pointer).
int run(const RunRequest& req, std::ostream& log, std::ostream& err);

}  // namespace folix
