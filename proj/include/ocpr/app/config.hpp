#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocpr/channel.hpp"
#include "ocpr/cpr.hpp"

namespace ocpr::app {

// Bad or inconsistent configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// A numerical check did not converge (quadrature, PSD integral, unity-gain search).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { Lock, Bode, Psd, BerSweep, Trace };

struct ModulationConfig {
  int order = 16;
  double a_oma = 1.0;
  double a0 = 0.1;
};

struct LoopConfig {
  LoopParams params;
  DetectorMethod detector = DetectorMethod::Method1;
  std::optional<double> actuator_range_rad;
  std::optional<double> closed_loop_bw_hz;  // rescale corner frequencies to this bandwidth
};

struct ChannelConfig {
  double baud_rate_hz = 100e9;
  std::optional<double> snr_db;
  std::optional<double> n0;
  std::optional<double> pd_bandwidth_hz;
  double phase_offset_rad = 0.0;
  int samples_per_symbol = 2;
};

struct SweepSpec {
  std::string key;  // dotted config key, e.g. laser.linewidth_hz
  std::vector<double> values;
};

struct RunConfig {
  RunMode mode = RunMode::Bode;
  double duration_s = 300e-6;
  std::uint64_t seed = 1;
  std::uint64_t num_symbols = 0;
  double snr_start_db = 4.0;
  double snr_stop_db = 24.0;
  double snr_step_db = 0.25;
  std::string output_dir = "ocpr-out";
  bool svg = false;
  std::optional<SweepSpec> sweep;
  int loop_decimation = 1000;
  double averaging_cutoff_hz = 1e9;
  DataPattern data_pattern = DataPattern::Balanced;
  double f_min_hz = 1.0;
  double f_max_hz = 100e6;
  double points_per_decade = 200.0;
  std::uint64_t record_stride = 1;
};

struct ScenarioConfig {
  std::string name = "scenario";
  ModulationConfig modulation;
  double linewidth_hz = 1e6;
  double delta_l_m = 0.1;
  double refractive_index = kDefaultRefractiveIndex;
  LoopConfig loop;
  ChannelConfig channel;
  RunConfig run;
};

std::string to_string(RunMode mode);

// Parses and validates YAML text. `source` names the origin in messages
// ("<source>:<line>: <key>: ..."). Unknown keys are rejected; a top-level
// `manifest` block is accepted and ignored.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);

// Fully resolved YAML: every key explicit, numbers printed with round-trip precision.
std::string to_yaml(const ScenarioConfig& cfg);

// Applies one sweep value to a copy of cfg. Throws ConfigError for unsupported keys.
ScenarioConfig with_sweep_value(const ScenarioConfig& cfg, const std::string& key, double value);

}  // namespace ocpr::app
