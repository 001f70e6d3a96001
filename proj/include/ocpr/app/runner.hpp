#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ocpr/app/config.hpp"
#include "ocpr/constellation.hpp"

namespace ocpr::app {

inline constexpr const char* kOutputDirEnv = "OCPR_OUTPUT_DIR";

std::string tool_version();

struct SummaryEntry {
  std::string tag;  // sweep case, "base" without a sweep
  std::string key;
  std::string value;
};

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::string> files;  // relative to output_dir, in write order
  std::vector<SummaryEntry> summary;
  std::vector<std::string> messages;  // one-line reports for the console
};

// --out beats $OCPR_OUTPUT_DIR beats run.output_dir.
std::filesystem::path resolve_output_dir(const ScenarioConfig& cfg, const std::optional<std::string>& cli_out);

// Runs every sweep case of cfg and writes CSVs, optional SVGs, summary.csv and manifest.yaml.
// Throws ConfigError, NumericalError or IoError.
RunResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& output_dir);

// Helpers shared with tests.
OffsetQamConstellation make_constellation(const ScenarioConfig& cfg);
LoopParams effective_loop(const ScenarioConfig& cfg);  // applies loop.closed_loop_bw_hz
double resolve_n0(const ScenarioConfig& cfg, const OffsetQamConstellation& c);  // 0 when noiseless

}  // namespace ocpr::app
