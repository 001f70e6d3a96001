#include "ocpr/app/config.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>
#include <yaml-cpp/yaml.h>

namespace ocpr::app {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(int line, const std::string& key, const std::string& msg) const {
    throw ConfigError(fmt::format("{}:{}: {}: {}", source_, line, key, msg), line);
  }

  void require_map(const YAML::Node& n, const std::string& key) const {
    if (!n.IsMap()) fail(line_of(n), key, "expected a mapping");
  }

  void check_keys(const YAML::Node& map, const std::string& section, const std::set<std::string>& allowed) const {
    for (auto it = map.begin(); it != map.end(); ++it) {
      const auto k = it->first.as<std::string>();
      if (!allowed.contains(k)) {
        fail(line_of(it->first), section.empty() ? k : section + "." + k, "unknown key");
      }
    }
  }

  double number(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(line_of(n), key, "expected a number");
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) fail(line_of(n), key, "must be finite");
      return v;
    } catch (const YAML::BadConversion&) {
      fail(line_of(n), key, fmt::format("expected a number, got '{}'", n.Scalar()));
    }
  }

  long long integer(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(line_of(n), key, "expected an integer");
    try {
      return n.as<long long>();
    } catch (const YAML::BadConversion&) {
      fail(line_of(n), key, fmt::format("expected an integer, got '{}'", n.Scalar()));
    }
  }

  std::string text(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(line_of(n), key, "expected a string");
    return n.Scalar();
  }

  bool boolean(const YAML::Node& n, const std::string& key) const {
    try {
      return n.as<bool>();
    } catch (const YAML::BadConversion&) {
      fail(line_of(n), key, fmt::format("expected true/false, got '{}'", n.Scalar()));
    }
  }

  double positive(const YAML::Node& n, const std::string& key) const {
    const double v = number(n, key);
    if (!(v > 0.0)) fail(line_of(n), key, fmt::format("must be > 0 (got {})", v));
    return v;
  }

  double non_negative(const YAML::Node& n, const std::string& key) const {
    const double v = number(n, key);
    if (!(v >= 0.0)) fail(line_of(n), key, fmt::format("must be >= 0 (got {})", v));
    return v;
  }

 private:
  std::string source_;
};

const std::set<std::string> kTopKeys = {"name", "modulation", "laser", "mismatch", "loop", "channel", "run", "manifest"};
const std::set<std::string> kModulationKeys = {"order", "a_oma", "a0", "m_ratio"};
const std::set<std::string> kLaserKeys = {"linewidth_hz"};
const std::set<std::string> kMismatchKeys = {"delta_l_m", "refractive_index"};
const std::set<std::string> kLoopKeys = {"k_pd_v_per_rad", "k_lf_v_per_v", "k_driver_v_per_v", "k_ps_rad_per_v",
                                         "f_lf_z_hz", "f_lf_p_hz", "f_ps_hz", "detector",
                                         "actuator_range_rad", "closed_loop_bw_hz"};
const std::set<std::string> kChannelKeys = {"baud_rate_hz", "snr_db", "n0", "pd_bandwidth_hz",
                                            "phase_offset_rad", "samples_per_symbol"};
const std::set<std::string> kRunKeys = {"mode", "duration_s", "seed", "num_symbols", "snr_grid_db", "output_dir",
                                        "svg", "sweep", "loop_decimation", "averaging_cutoff_hz", "data_pattern",
                                        "f_min_hz", "f_max_hz", "points_per_decade", "record_stride"};
const std::set<std::string> kSweepKeys = {"key", "values"};
const std::set<std::string> kGridKeys = {"start", "stop", "step"};
const std::set<std::string> kSweepable = {"laser.linewidth_hz", "mismatch.delta_l_m", "loop.closed_loop_bw_hz",
                                          "modulation.m_ratio", "modulation.order", "channel.phase_offset_rad",
                                          "channel.snr_db"};

RunMode parse_mode(const Reader& r, const YAML::Node& n) {
  const auto s = r.text(n, "run.mode");
  if (s == "lock") return RunMode::Lock;
  if (s == "bode") return RunMode::Bode;
  if (s == "psd") return RunMode::Psd;
  if (s == "ber-sweep") return RunMode::BerSweep;
  if (s == "trace") return RunMode::Trace;
  r.fail(line_of(n), "run.mode", fmt::format("unknown mode '{}' (lock|bode|psd|ber-sweep|trace)", s));
}

// Range checks that also apply to swept values.
void check_value(const Reader& r, int line, const std::string& key, double v) {
  if (key == "laser.linewidth_hz" || key == "mismatch.delta_l_m" || key == "modulation.m_ratio") {
    if (!(v >= 0.0)) r.fail(line, key, fmt::format("must be >= 0 (got {})", v));
  } else if (key == "loop.closed_loop_bw_hz") {
    if (!(v > 0.0)) r.fail(line, key, fmt::format("must be > 0 (got {})", v));
  } else if (key == "modulation.order") {
    if (v != 4 && v != 16 && v != 64 && v != 256) r.fail(line, key, fmt::format("must be 4, 16, 64 or 256 (got {})", v));
  }
}

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Lock: return "lock";
    case RunMode::Bode: return "bode";
    case RunMode::Psd: return "psd";
    case RunMode::BerSweep: return "ber-sweep";
    case RunMode::Trace: return "trace";
  }
  return "?";
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
  Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}: syntax error: {}", source, e.mark.line + 1, e.msg), e.mark.line + 1);
  }
  if (!root.IsMap()) throw ConfigError(source + ":1: config must be a mapping", 1);
  r.check_keys(root, "", kTopKeys);

  ScenarioConfig cfg;
  if (root["name"]) cfg.name = r.text(root["name"], "name");

  if (const auto m = root["modulation"]) {
    r.require_map(m, "modulation");
    r.check_keys(m, "modulation", kModulationKeys);
    if (m["order"]) {
      const auto order = r.integer(m["order"], "modulation.order");
      check_value(r, line_of(m["order"]), "modulation.order", static_cast<double>(order));
      cfg.modulation.order = static_cast<int>(order);
    }
    if (m["a_oma"]) cfg.modulation.a_oma = r.positive(m["a_oma"], "modulation.a_oma");
    if (m["a0"] && m["m_ratio"]) r.fail(line_of(m["m_ratio"]), "modulation.m_ratio", "give either a0 or m_ratio, not both");
    if (m["a0"]) {
      cfg.modulation.a0 = r.non_negative(m["a0"], "modulation.a0");
    } else {
      const double ratio = m["m_ratio"] ? r.non_negative(m["m_ratio"], "modulation.m_ratio") : 0.1;
      cfg.modulation.a0 = ratio * cfg.modulation.a_oma;
    }
  }

  if (const auto l = root["laser"]) {
    r.require_map(l, "laser");
    r.check_keys(l, "laser", kLaserKeys);
    if (l["linewidth_hz"]) cfg.linewidth_hz = r.non_negative(l["linewidth_hz"], "laser.linewidth_hz");
  }

  if (const auto mm = root["mismatch"]) {
    r.require_map(mm, "mismatch");
    r.check_keys(mm, "mismatch", kMismatchKeys);
    if (mm["delta_l_m"]) cfg.delta_l_m = r.non_negative(mm["delta_l_m"], "mismatch.delta_l_m");
    if (mm["refractive_index"]) cfg.refractive_index = r.positive(mm["refractive_index"], "mismatch.refractive_index");
  }

  if (const auto lp = root["loop"]) {
    r.require_map(lp, "loop");
    r.check_keys(lp, "loop", kLoopKeys);
    auto& p = cfg.loop.params;
    if (lp["k_pd_v_per_rad"]) p.k_pd = r.positive(lp["k_pd_v_per_rad"], "loop.k_pd_v_per_rad");
    if (lp["k_lf_v_per_v"]) p.k_lf = r.positive(lp["k_lf_v_per_v"], "loop.k_lf_v_per_v");
    if (lp["k_driver_v_per_v"]) p.k_driver = r.positive(lp["k_driver_v_per_v"], "loop.k_driver_v_per_v");
    if (lp["k_ps_rad_per_v"]) p.k_ps = r.positive(lp["k_ps_rad_per_v"], "loop.k_ps_rad_per_v");
    if (lp["f_lf_z_hz"]) p.f_lf_z = r.positive(lp["f_lf_z_hz"], "loop.f_lf_z_hz");
    if (lp["f_lf_p_hz"]) p.f_lf_p = r.positive(lp["f_lf_p_hz"], "loop.f_lf_p_hz");
    if (lp["f_ps_hz"]) p.f_ps = r.positive(lp["f_ps_hz"], "loop.f_ps_hz");
    if (lp["detector"]) {
      const auto d = r.text(lp["detector"], "loop.detector");
      if (d == "method1") {
        cfg.loop.detector = DetectorMethod::Method1;
      } else if (d == "method2") {
        cfg.loop.detector = DetectorMethod::Method2;
      } else {
        r.fail(line_of(lp["detector"]), "loop.detector", fmt::format("unknown detector '{}' (method1|method2)", d));
      }
    }
    if (lp["actuator_range_rad"]) cfg.loop.actuator_range_rad = r.positive(lp["actuator_range_rad"], "loop.actuator_range_rad");
    if (lp["closed_loop_bw_hz"]) cfg.loop.closed_loop_bw_hz = r.positive(lp["closed_loop_bw_hz"], "loop.closed_loop_bw_hz");
  }

  if (const auto ch = root["channel"]) {
    r.require_map(ch, "channel");
    r.check_keys(ch, "channel", kChannelKeys);
    auto& c = cfg.channel;
    if (ch["baud_rate_hz"]) c.baud_rate_hz = r.positive(ch["baud_rate_hz"], "channel.baud_rate_hz");
    if (ch["snr_db"] && ch["n0"]) r.fail(line_of(ch["n0"]), "channel.n0", "give either snr_db or n0, not both");
    if (ch["snr_db"]) c.snr_db = r.number(ch["snr_db"], "channel.snr_db");
    if (ch["n0"]) c.n0 = r.non_negative(ch["n0"], "channel.n0");
    if (ch["pd_bandwidth_hz"]) c.pd_bandwidth_hz = r.positive(ch["pd_bandwidth_hz"], "channel.pd_bandwidth_hz");
    if (ch["phase_offset_rad"]) c.phase_offset_rad = r.number(ch["phase_offset_rad"], "channel.phase_offset_rad");
    if (ch["samples_per_symbol"]) {
      const auto sps = r.integer(ch["samples_per_symbol"], "channel.samples_per_symbol");
      if (sps < 1 || sps > 64) r.fail(line_of(ch["samples_per_symbol"]), "channel.samples_per_symbol", "must be in 1..64");
      c.samples_per_symbol = static_cast<int>(sps);
    }
  }

  const auto run = root["run"];
  if (!run) throw ConfigError(source + ":1: run: missing required section", 1);
  r.require_map(run, "run");
  r.check_keys(run, "run", kRunKeys);
  auto& rc = cfg.run;
  if (!run["mode"]) r.fail(line_of(run), "run.mode", "missing required key");
  rc.mode = parse_mode(r, run["mode"]);
  if (run["duration_s"]) rc.duration_s = r.positive(run["duration_s"], "run.duration_s");
  if (run["seed"]) {
    const auto s = r.integer(run["seed"], "run.seed");
    if (s < 0) r.fail(line_of(run["seed"]), "run.seed", "must be >= 0");
    rc.seed = static_cast<std::uint64_t>(s);
  }
  if (run["num_symbols"]) {
    const auto n = r.integer(run["num_symbols"], "run.num_symbols");
    if (n < 0) r.fail(line_of(run["num_symbols"]), "run.num_symbols", "must be >= 0");
    rc.num_symbols = static_cast<std::uint64_t>(n);
  }
  if (const auto g = run["snr_grid_db"]) {
    r.require_map(g, "run.snr_grid_db");
    r.check_keys(g, "run.snr_grid_db", kGridKeys);
    if (g["start"]) rc.snr_start_db = r.number(g["start"], "run.snr_grid_db.start");
    if (g["stop"]) rc.snr_stop_db = r.number(g["stop"], "run.snr_grid_db.stop");
    if (g["step"]) rc.snr_step_db = r.positive(g["step"], "run.snr_grid_db.step");
    if (!(rc.snr_stop_db > rc.snr_start_db)) r.fail(line_of(g), "run.snr_grid_db", "stop must exceed start");
  }
  if (run["output_dir"]) rc.output_dir = r.text(run["output_dir"], "run.output_dir");
  if (run["svg"]) rc.svg = r.boolean(run["svg"], "run.svg");
  if (const auto sw = run["sweep"]) {
    r.require_map(sw, "run.sweep");
    r.check_keys(sw, "run.sweep", kSweepKeys);
    if (!sw["key"] || !sw["values"]) r.fail(line_of(sw), "run.sweep", "needs both key and values");
    SweepSpec spec;
    spec.key = r.text(sw["key"], "run.sweep.key");
    if (!kSweepable.contains(spec.key)) {
      r.fail(line_of(sw["key"]), "run.sweep.key", fmt::format("'{}' cannot be swept", spec.key));
    }
    const auto vals = sw["values"];
    if (!vals.IsSequence() || vals.size() == 0) r.fail(line_of(vals), "run.sweep.values", "expected a non-empty list");
    for (const auto& v : vals) {
      const double x = r.number(v, "run.sweep.values");
      check_value(r, line_of(v), spec.key, x);
      spec.values.push_back(x);
    }
    rc.sweep = std::move(spec);
  }
  if (run["loop_decimation"]) {
    const auto d = r.integer(run["loop_decimation"], "run.loop_decimation");
    if (d < 1) r.fail(line_of(run["loop_decimation"]), "run.loop_decimation", "must be >= 1");
    rc.loop_decimation = static_cast<int>(d);
  }
  if (run["averaging_cutoff_hz"]) rc.averaging_cutoff_hz = r.positive(run["averaging_cutoff_hz"], "run.averaging_cutoff_hz");
  if (run["data_pattern"]) {
    const auto s = r.text(run["data_pattern"], "run.data_pattern");
    if (s == "balanced") {
      rc.data_pattern = DataPattern::Balanced;
    } else if (s == "iid") {
      rc.data_pattern = DataPattern::Iid;
    } else {
      r.fail(line_of(run["data_pattern"]), "run.data_pattern", fmt::format("unknown pattern '{}' (balanced|iid)", s));
    }
  }
  if (run["f_min_hz"]) rc.f_min_hz = r.positive(run["f_min_hz"], "run.f_min_hz");
  if (run["f_max_hz"]) rc.f_max_hz = r.positive(run["f_max_hz"], "run.f_max_hz");
  if (!(rc.f_max_hz > rc.f_min_hz)) r.fail(line_of(run), "run.f_max_hz", "must exceed run.f_min_hz");
  if (run["points_per_decade"]) rc.points_per_decade = r.positive(run["points_per_decade"], "run.points_per_decade");
  if (run["record_stride"]) {
    const auto s = r.integer(run["record_stride"], "run.record_stride");
    if (s < 1) r.fail(line_of(run["record_stride"]), "run.record_stride", "must be >= 1");
    rc.record_stride = static_cast<std::uint64_t>(s);
  }
  if (rc.mode == RunMode::Trace && rc.num_symbols == 0) {
    r.fail(line_of(run), "run.num_symbols", "trace mode needs num_symbols >= 1");
  }
  if (rc.mode == RunMode::Lock && !(cfg.modulation.a0 > 0.0)) {
    r.fail(line_of(root["modulation"] ? root["modulation"] : run), "modulation.a0", "lock mode needs a positive offset");
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string to_yaml(const ScenarioConfig& cfg) {
  std::string out;
  auto line = [&](const std::string& s) { out += s + "\n"; };
  const auto& p = cfg.loop.params;
  line(fmt::format("name: \"{}\"", cfg.name));
  line("modulation:");
  line(fmt::format("  order: {}", cfg.modulation.order));
  line(fmt::format("  a_oma: {}", num(cfg.modulation.a_oma)));
  line(fmt::format("  a0: {}", num(cfg.modulation.a0)));
  line("laser:");
  line(fmt::format("  linewidth_hz: {}", num(cfg.linewidth_hz)));
  line("mismatch:");
  line(fmt::format("  delta_l_m: {}", num(cfg.delta_l_m)));
  line(fmt::format("  refractive_index: {}", num(cfg.refractive_index)));
  line("loop:");
  line(fmt::format("  k_pd_v_per_rad: {}", num(p.k_pd)));
  line(fmt::format("  k_lf_v_per_v: {}", num(p.k_lf)));
  line(fmt::format("  k_driver_v_per_v: {}", num(p.k_driver)));
  line(fmt::format("  k_ps_rad_per_v: {}", num(p.k_ps)));
  line(fmt::format("  f_lf_z_hz: {}", num(p.f_lf_z)));
  line(fmt::format("  f_lf_p_hz: {}", num(p.f_lf_p)));
  line(fmt::format("  f_ps_hz: {}", num(p.f_ps)));
  line(fmt::format("  detector: {}", cfg.loop.detector == DetectorMethod::Method1 ? "method1" : "method2"));
  if (cfg.loop.actuator_range_rad) line(fmt::format("  actuator_range_rad: {}", num(*cfg.loop.actuator_range_rad)));
  if (cfg.loop.closed_loop_bw_hz) line(fmt::format("  closed_loop_bw_hz: {}", num(*cfg.loop.closed_loop_bw_hz)));
  const auto& c = cfg.channel;
  line("channel:");
  line(fmt::format("  baud_rate_hz: {}", num(c.baud_rate_hz)));
  if (c.snr_db) line(fmt::format("  snr_db: {}", num(*c.snr_db)));
  if (c.n0) line(fmt::format("  n0: {}", num(*c.n0)));
  if (c.pd_bandwidth_hz) line(fmt::format("  pd_bandwidth_hz: {}", num(*c.pd_bandwidth_hz)));
  line(fmt::format("  phase_offset_rad: {}", num(c.phase_offset_rad)));
  line(fmt::format("  samples_per_symbol: {}", c.samples_per_symbol));
  const auto& r = cfg.run;
  line("run:");
  line(fmt::format("  mode: {}", to_string(r.mode)));
  line(fmt::format("  duration_s: {}", num(r.duration_s)));
  line(fmt::format("  seed: {}", r.seed));
  line(fmt::format("  num_symbols: {}", r.num_symbols));
  line("  snr_grid_db:");
  line(fmt::format("    start: {}", num(r.snr_start_db)));
  line(fmt::format("    stop: {}", num(r.snr_stop_db)));
  line(fmt::format("    step: {}", num(r.snr_step_db)));
  line(fmt::format("  output_dir: \"{}\"", r.output_dir));
  line(fmt::format("  svg: {}", r.svg ? "true" : "false"));
  if (r.sweep) {
    line("  sweep:");
    line(fmt::format("    key: {}", r.sweep->key));
    std::string vals;
    for (std::size_t k = 0; k < r.sweep->values.size(); ++k) vals += (k ? ", " : "") + num(r.sweep->values[k]);
    line(fmt::format("    values: [{}]", vals));
  }
  line(fmt::format("  loop_decimation: {}", r.loop_decimation));
  line(fmt::format("  averaging_cutoff_hz: {}", num(r.averaging_cutoff_hz)));
  line(fmt::format("  data_pattern: {}", r.data_pattern == DataPattern::Balanced ? "balanced" : "iid"));
  line(fmt::format("  f_min_hz: {}", num(r.f_min_hz)));
  line(fmt::format("  f_max_hz: {}", num(r.f_max_hz)));
  line(fmt::format("  points_per_decade: {}", num(r.points_per_decade)));
  line(fmt::format("  record_stride: {}", r.record_stride));
  return out;
}

ScenarioConfig with_sweep_value(const ScenarioConfig& cfg, const std::string& key, double value) {
  ScenarioConfig out = cfg;
  const Reader r("<sweep>");
  check_value(r, 0, key, value);
  if (key == "laser.linewidth_hz") {
    out.linewidth_hz = value;
  } else if (key == "mismatch.delta_l_m") {
    out.delta_l_m = value;
  } else if (key == "loop.closed_loop_bw_hz") {
    out.loop.closed_loop_bw_hz = value;
  } else if (key == "modulation.m_ratio") {
    out.modulation.a0 = value * out.modulation.a_oma;
  } else if (key == "modulation.order") {
    out.modulation.order = static_cast<int>(value);
  } else if (key == "channel.phase_offset_rad") {
    out.channel.phase_offset_rad = value;
  } else if (key == "channel.snr_db") {
    out.channel.snr_db = value;
    out.channel.n0.reset();
  } else {
    throw ConfigError(fmt::format("run.sweep.key: '{}' cannot be swept", key), 0);
  }
  out.run.sweep.reset();
  return out;
}

}  // namespace ocpr::app
