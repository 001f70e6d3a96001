#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "doctest.h"
#include "ocpr/app/config.hpp"
#include "ocpr/app/csv.hpp"
#include "ocpr/app/presets.hpp"
#include "ocpr/app/runner.hpp"
#include "ocpr/app/svg.hpp"

using namespace ocpr::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ocpr_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(OCPR_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kMinimal = R"(name: t
run:
  mode: bode
)";

}  // namespace

TEST_CASE("minimal config takes documented defaults") {
  const auto cfg = parse_config(kMinimal);
  CHECK(cfg.modulation.order == 16);
  CHECK(cfg.modulation.a0 == doctest::Approx(0.1));
  CHECK(cfg.refractive_index == doctest::Approx(1.468));
  CHECK(cfg.loop.params.k_pd == doctest::Approx(2.55e-2));
  CHECK(cfg.run.mode == RunMode::Bode);
}

TEST_CASE("full config parses every section") {
  const auto cfg = parse_config(R"(name: full
modulation: {order: 4, a_oma: 2.0, m_ratio: 0.2}
laser: {linewidth_hz: 5.0e5}
mismatch: {delta_l_m: 0.05, refractive_index: 1.5}
loop:
  k_pd_v_per_rad: 0.03
  k_lf_v_per_v: 1000
  k_driver_v_per_v: 3
  k_ps_rad_per_v: 10
  f_lf_z_hz: 9.0e5
  f_lf_p_hz: 5.0e3
  f_ps_hz: 1.0e3
  detector: method2
  actuator_range_rad: 15.7
  closed_loop_bw_hz: 1.0e6
channel: {baud_rate_hz: 5.0e10, snr_db: 18, pd_bandwidth_hz: 3.0e10, phase_offset_rad: 0.2, samples_per_symbol: 4}
run:
  mode: ber-sweep
  duration_s: 1.0e-4
  seed: 42
  num_symbols: 20000
  snr_grid_db: {start: 5, stop: 10, step: 0.5}
  output_dir: out
  svg: true
  sweep: {key: laser.linewidth_hz, values: [1.0e5, 1.0e6]}
  data_pattern: iid
)");
  CHECK(cfg.modulation.order == 4);
  CHECK(cfg.modulation.a0 == doctest::Approx(0.4));
  CHECK(cfg.linewidth_hz == 5e5);
  CHECK(cfg.refractive_index == 1.5);
  CHECK(cfg.loop.detector == ocpr::DetectorMethod::Method2);
  CHECK(*cfg.loop.closed_loop_bw_hz == 1e6);
  CHECK(*cfg.channel.snr_db == 18.0);
  CHECK(cfg.channel.samples_per_symbol == 4);
  CHECK(cfg.run.seed == 42);
  CHECK(cfg.run.svg);
  CHECK(cfg.run.sweep->values.size() == 2);
  CHECK(cfg.run.data_pattern == ocpr::DataPattern::Iid);
  CHECK(cfg.run.snr_step_db == 0.5);
}

TEST_CASE("config errors name the key and line") {
  struct Case {
    const char* text;
    const char* key;
    int line;
  };
  const Case cases[] = {
      {"run:\n  mode: bode\nlaser:\n  linewidth_hz: -1\n", "laser.linewidth_hz", 4},
      {"run:\n  mode: bode\n  colour: red\n", "run.colour", 3},
      {"bogus: 1\nrun:\n  mode: bode\n", "bogus", 1},
      {"run:\n  mode: fly\n", "run.mode", 2},
      {"modulation:\n  order: 8\nrun:\n  mode: bode\n", "modulation.order", 2},
      {"modulation:\n  a_oma: abc\nrun:\n  mode: bode\n", "modulation.a_oma", 2},
      {"run:\n  mode: bode\n  sweep:\n    key: laser.linewidth_hz\n    values: [1, -2]\n", "laser.linewidth_hz", 5},
      {"run:\n  mode: bode\n  sweep:\n    key: loop.k_pd_v_per_rad\n    values: [1]\n", "run.sweep.key", 4},
      {"loop:\n  detector: costas\nrun:\n  mode: bode\n", "loop.detector", 2},
      {"run:\n  mode: trace\n", "run.num_symbols", 2},
  };
  for (const auto& c : cases) {
    CAPTURE(c.text);
    try {
      parse_config(c.text, "cfg.yaml");
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(c.key) != std::string::npos);
      CHECK(msg.find("cfg.yaml:" + std::to_string(c.line) + ":") == 0);
      CHECK(e.line() == c.line);
    }
  }
  CHECK_THROWS_AS(parse_config("name: x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("run: [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/ocpr.yaml"), IoError);
}

TEST_CASE("resolved YAML round-trips") {
  for (const auto& p : presets()) {
    const auto a = parse_config(p.yaml, p.name);
    const auto text = to_yaml(a);
    const auto b = parse_config(text, "resolved");
    CAPTURE(p.name);
    CHECK(to_yaml(b) == text);
  }
}

TEST_CASE("manifest block is ignored on reload") {
  const std::string text = std::string(kMinimal) + "manifest:\n  tool_version: \"x\"\n  outputs: [a.csv]\n";
  CHECK_NOTHROW(parse_config(text));
}

TEST_CASE("sweep values apply to a copy") {
  const auto cfg = parse_config(kMinimal);
  const auto s = with_sweep_value(cfg, "modulation.m_ratio", 0.2);
  CHECK(s.modulation.a0 == doctest::Approx(0.2));
  CHECK(cfg.modulation.a0 == doctest::Approx(0.1));
  CHECK_THROWS_AS(with_sweep_value(cfg, "laser.linewidth_hz", -1.0), ConfigError);
  CHECK_THROWS_AS(with_sweep_value(cfg, "loop.k_pd_v_per_rad", 1.0), ConfigError);
}

TEST_CASE("at least seven presets, sorted, each one runs") {
  const auto& all = presets();
  CHECK(all.size() >= 7);
  CHECK(std::is_sorted(all.begin(), all.end(), [](const Preset& a, const Preset& b) { return a.name < b.name; }));
  for (const char* name : {"table1_bode", "fig6_psd", "fig9a_offset", "fig9b_loop_bw", "fig9c_linewidth_4qam",
                           "fig9_linewidth_16qam", "fig9d_mismatch", "lock_4qam", "lock_16qam"}) {
    CHECK(find_preset(name) != nullptr);
  }
  for (const auto& p : all) {
    CAPTURE(p.name);
    const auto cfg = parse_config(p.yaml, p.name);
    const auto dir = scratch("preset_" + p.name);
    const auto res = run_scenario(cfg, dir);
    CHECK(fs::exists(dir / "manifest.yaml"));
    CHECK(fs::exists(dir / "summary.csv"));
    for (const auto& f : res.files) CHECK(fs::exists(dir / f));
  }
}

TEST_CASE("table1_bode preset writes at least 1000 rows and a metrics line") {
  const auto cfg = parse_config(find_preset("table1_bode")->yaml);
  const auto dir = scratch("bode");
  const auto res = run_scenario(cfg, dir);
  const auto t = read_csv(dir / "bode.csv");
  CHECK(t.columns == std::vector<std::string>{"f_hz", "mag_db", "phase_deg"});
  CHECK(t.rows.size() >= 1000);
  REQUIRE(res.messages.size() == 1);
  CHECK(res.messages[0].find("crossover_hz=") != std::string::npos);
  const auto m = read_csv(dir / "bode_metrics.csv");
  CHECK(m.values("dc_gain")[0] == doctest::Approx(960.84));
}

TEST_CASE("linewidth preset writes one BER file per linewidth") {
  const auto cfg = parse_config(find_preset("fig9_linewidth_16qam")->yaml);
  const auto dir = scratch("lw16");
  const auto res = run_scenario(cfg, dir);
  int ber_files = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("ber_", 0) == 0 && e.path().extension() == ".csv") ++ber_files;
  }
  CHECK(ber_files == 4);
  const auto t = read_csv(dir / "ber_linewidth_hz_500000.csv");
  CHECK(t.columns[0] == "snr_db");
  CHECK(t.values("linewidth_hz")[0] == 5e5);
  CHECK(t.values("order")[0] == 16);
}

TEST_CASE("runs are reproducible from their manifest") {
  auto cfg = parse_config(R"(name: repro
modulation: {order: 16}
laser: {linewidth_hz: 1.0e6}
channel: {snr_db: 15, phase_offset_rad: 0.3}
run:
  mode: lock
  duration_s: 2.0e-5
  seed: 77
)");
  const auto d1 = scratch("repro1");
  run_scenario(cfg, d1);
  const auto again = parse_config(slurp(d1 / "manifest.yaml"), "manifest");
  const auto d2 = scratch("repro2");
  run_scenario(again, d2);
  CHECK(slurp(d1 / "lock.csv") == slurp(d2 / "lock.csv"));
  CHECK(slurp(d1 / "summary.csv") == slurp(d2 / "summary.csv"));

  auto mc = parse_config(R"(name: repro_mc
modulation: {order: 4}
run:
  mode: ber-sweep
  num_symbols: 20000
  snr_grid_db: {start: 4, stop: 8, step: 1}
  seed: 5
)");
  const auto d3 = scratch("repro3");
  run_scenario(mc, d3);
  const auto d4 = scratch("repro4");
  run_scenario(parse_config(slurp(d3 / "manifest.yaml")), d4);
  CHECK(slurp(d3 / "ber_mc.csv") == slurp(d4 / "ber_mc.csv"));
  CHECK(slurp(d3 / "ber.csv") == slurp(d4 / "ber.csv"));
}

TEST_CASE("output directory precedence") {
  const auto cfg = parse_config(kMinimal);
  ::unsetenv(kOutputDirEnv);
  CHECK(resolve_output_dir(cfg, std::nullopt) == fs::path("ocpr-out"));
  ::setenv(kOutputDirEnv, "/tmp/env-dir", 1);
  CHECK(resolve_output_dir(cfg, std::nullopt) == fs::path("/tmp/env-dir"));
  CHECK(resolve_output_dir(cfg, std::string("/tmp/cli")) == fs::path("/tmp/cli"));
  ::unsetenv(kOutputDirEnv);
}

TEST_CASE("csv round trip and rejection") {
  CsvTable t{{"a", "b"}, {{1.0, 2.5}, {-3e-7, 1e12}}};
  const auto back = parse_csv(format_csv(t));
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(format_csv(t) == "a,b\n1,2.5\n-3e-07,1e+12\n");
  CHECK_THROWS_AS(parse_csv(""), ConfigError);
  CHECK_THROWS_AS(parse_csv("a,b\n"), ConfigError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ConfigError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,x\n"), ConfigError);
}

TEST_CASE("svg output") {
  const auto cfg = parse_config(R"(name: s
modulation: {order: 4}
run:
  mode: ber-sweep
  snr_grid_db: {start: 4, stop: 16, step: 0.5}
)");
  const auto dir = scratch("svg");
  run_scenario(cfg, dir);
  const auto table = read_csv(dir / "ber.csv");
  const auto a = emit_svg(table, PlotKind::Ber);
  const auto b = emit_svg(table, PlotKind::Ber);
  CHECK(a == b);
  std::size_t count = 0;
  for (std::size_t pos = a.find("class=\"threshold\""); pos != std::string::npos;
       pos = a.find("class=\"threshold\"", pos + 1)) {
    ++count;
  }
  CHECK(count == 1);
  CHECK(a.find("1e-4") != std::string::npos);  // log-decade tick labels
  plot_file(dir / "ber.csv", PlotKind::Ber, dir / "ber.svg");
  CHECK(slurp(dir / "ber.svg") == a);

  write_text_file(dir / "empty.csv", "");
  CHECK_THROWS_AS(plot_file(dir / "empty.csv", PlotKind::Ber, dir / "empty.svg"), ConfigError);
  CHECK_FALSE(fs::exists(dir / "empty.svg"));
  CHECK_THROWS_AS(emit_svg(read_csv(dir / "ber.csv"), PlotKind::Lock), ConfigError);
  CHECK_THROWS_AS(parse_plot_kind("pie"), ConfigError);
}

TEST_CASE("svg rendering for every report kind") {
  const auto dir = scratch("kinds");
  for (const char* name : {"table1_bode", "fig6_psd", "trace_4qam"}) {
    auto cfg = parse_config(find_preset(name)->yaml);
    cfg.run.svg = true;
    const auto res = run_scenario(cfg, dir / name);
    CHECK(std::any_of(res.files.begin(), res.files.end(),
                      [](const std::string& f) { return f.size() > 4 && f.substr(f.size() - 4) == ".svg"; }));
  }
}

TEST_CASE("cli exit codes") {
  const auto dir = scratch("cli");
  const auto log = dir / "log.txt";
  CHECK(run_cli("version", log) == 0);
  CHECK(slurp(log).find("ocpr ") == 0);
  CHECK(run_cli("presets", log) == 0);
  const auto listing = slurp(log);
  CHECK(std::count(listing.begin(), listing.end(), '\n') >= 7);

  CHECK(run_cli("run table1_bode --out " + (dir / "bode").string(), log) == 0);
  CHECK(slurp(log).find("crossover_hz=") != std::string::npos);
  CHECK(fs::exists(dir / "bode" / "bode.csv"));

  write_text_file(dir / "neg.yaml", "run:\n  mode: bode\nlaser:\n  linewidth_hz: -5\n");
  CHECK(run_cli("run " + (dir / "neg.yaml").string(), log) == 2);
  CHECK(slurp(log).find("laser.linewidth_hz") != std::string::npos);
  CHECK(slurp(log).find("neg.yaml:4:") != std::string::npos);

  write_text_file(dir / "degenerate.yaml", "loop:\n  k_lf_v_per_v: 0.001\nrun:\n  mode: bode\n");
  CHECK(run_cli("run " + (dir / "degenerate.yaml").string() + " --out " + (dir / "deg").string(), log) == 3);
  CHECK(slurp(log).find("crossover") != std::string::npos);

  CHECK(run_cli("run no_such_preset_or_file", log) == 1);
  write_text_file(dir / "blocker", "x");
  CHECK(run_cli("run table1_bode --out " + (dir / "blocker" / "sub").string(), log) == 1);

  CHECK(run_cli("plot " + (dir / "bode" / "bode.csv").string() + " bode -o " + (dir / "b.svg").string(), log) == 0);
  CHECK(fs::exists(dir / "b.svg"));
  write_text_file(dir / "bad.csv", "x,y\n1,oops\n");
  CHECK(run_cli("plot " + (dir / "bad.csv").string() + " ber", log) == 2);
  CHECK_FALSE(fs::exists(dir / "bad.svg"));

  ::setenv(kOutputDirEnv, (dir / "from_env").string().c_str(), 1);
  CHECK(run_cli("run table1_bode", log) == 0);
  ::unsetenv(kOutputDirEnv);
  CHECK(fs::exists(dir / "from_env" / "bode.csv"));
}
