#include "ocpr/app/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <stdexcept>

#include "ocpr/analysis.hpp"
#include "ocpr/app/csv.hpp"
#include "ocpr/app/svg.hpp"
#include "ocpr/ber.hpp"
#include "ocpr/channel.hpp"
#include "ocpr/cpr.hpp"
#include "ocpr/phasenoise.hpp"
#include "ocpr/rng.hpp"

#ifndef OCPR_VERSION
#define OCPR_VERSION "0.0.0"
#endif

namespace ocpr::app {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return fmt::format("{:.10g}", v); }

struct CaseContext {
  const ScenarioConfig& cfg;
  std::string tag;     // "" for the base case
  std::string suffix;  // file-name suffix, "" or "_<leaf>_<value>"
  const fs::path& dir;
  RunResult& result;

  void add(const std::string& key, const std::string& value) {
    result.summary.push_back({tag.empty() ? "base" : tag, key, value});
  }

  void write(const std::string& stem, const CsvTable& table, std::optional<PlotKind> kind) {
    const std::string name = stem + suffix + ".csv";
    write_csv(dir / name, table);
    result.files.push_back(name);
    if (cfg.run.svg && kind) {
      const std::string svg = stem + suffix + ".svg";
      write_text_file(dir / svg, emit_svg(table, *kind));
      result.files.push_back(svg);
    }
  }
};

double tau_of(const ScenarioConfig& cfg) { return PathMismatch(cfg.delta_l_m, cfg.refractive_index).tau(); }

ChannelScenario make_channel(const ScenarioConfig& cfg, const OffsetQamConstellation& c) {
  ChannelScenario s;
  s.baud_rate_hz = cfg.channel.baud_rate_hz;
  s.laser.linewidth_hz = cfg.linewidth_hz;
  s.mismatch = PathMismatch(cfg.delta_l_m, cfg.refractive_index);
  s.phase_offset_rad = cfg.channel.phase_offset_rad;
  const double n0 = resolve_n0(cfg, c);
  if (n0 > 0.0) s.n0 = n0;
  s.pd_bandwidth_hz = cfg.channel.pd_bandwidth_hz;
  s.samples_per_symbol = cfg.channel.samples_per_symbol;
  s.seed = cfg.run.seed;
  return s;
}

void run_bode(CaseContext& ctx) {
  const auto& cfg = ctx.cfg;
  const LoopParams params = effective_loop(cfg);
  const RationalLoop loop = to_rational(params);
  const auto metrics = bode_metrics(loop);
  if (!metrics) throw NumericalError("unity-gain crossover search: |H| does not cross 1 inside 1 Hz..100 MHz");

  CsvTable t{{"f_hz", "mag_db", "phase_deg"}, {}};
  for (const auto& p : bode_sweep(loop, cfg.run.f_min_hz, cfg.run.f_max_hz, cfg.run.points_per_decade)) {
    t.rows.push_back({p.f_hz, p.mag_db, p.phase_deg});
  }
  ctx.write("bode", t, PlotKind::Bode);

  CsvTable m{{"crossover_hz", "phase_margin_deg", "closed_loop_bw_hz", "dc_gain"}, {}};
  m.rows.push_back({metrics->crossover_hz, metrics->phase_margin_deg,
                    metrics->closed_loop_bw_hz.value_or(std::nan("")), metrics->dc_gain});
  ctx.write("bode_metrics", m, std::nullopt);

  const auto spe = static_phase_error(M_PI / 4.0, params);
  ctx.add("dc_gain", num(metrics->dc_gain));
  ctx.add("crossover_hz", num(metrics->crossover_hz));
  ctx.add("phase_margin_deg", num(metrics->phase_margin_deg));
  ctx.add("closed_loop_bw_hz", metrics->closed_loop_bw_hz ? num(*metrics->closed_loop_bw_hz) : "none");
  ctx.add("static_error_at_pi_over_4_rad", num(spe.error_rad));
  ctx.result.messages.push_back(fmt::format(
      "bode{}: dc_gain={:.6g} crossover_hz={:.6g} phase_margin_deg={:.4g} closed_loop_bw_hz={}", ctx.suffix,
      metrics->dc_gain, metrics->crossover_hz, metrics->phase_margin_deg,
      metrics->closed_loop_bw_hz ? fmt::format("{:.6g}", *metrics->closed_loop_bw_hz) : "none"));
}

void run_psd(CaseContext& ctx) {
  const auto& cfg = ctx.cfg;
  const LoopParams params = effective_loop(cfg);
  const double tau = tau_of(cfg);
  const auto shaped = shaped_phase_noise(cfg.linewidth_hz, tau, params, cfg.run.f_min_hz, cfg.run.f_max_hz,
                                         cfg.run.points_per_decade);
  CsvTable t{{"f_hz", "psd_rad2_per_hz", "psd_open_rad2_per_hz"}, {}};
  for (std::size_t k = 0; k < shaped.freqs_hz.size(); ++k) {
    const double f = shaped.freqs_hz[k];
    t.rows.push_back({f, shaped.psd[k], shaped_psd(f, cfg.linewidth_hz, tau, std::nullopt)});
  }
  ctx.write("psd", t, PlotKind::Psd);

  const auto v = total_variance(cfg.linewidth_hz, tau, params);
  if (!v.converged) {
    throw NumericalError(fmt::format("phase-noise variance integral: {:.6g} vs {:.6g} at half density differ by > 1%",
                                     v.variance, v.coarse_variance));
  }
  ctx.add("tau_s", num(tau));
  ctx.add("variance_rad2", num(v.variance));
  ctx.add("sigma_rad", num(std::sqrt(v.variance)));
  ctx.add("free_running_variance_rad2", num(2.0 * M_PI * cfg.linewidth_hz * tau));
  ctx.add("integration_f_min_hz", num(v.limits.f_min_hz));
  ctx.add("integration_f_max_hz", num(v.limits.f_max_hz));
  ctx.result.messages.push_back(
      fmt::format("psd{}: variance_rad2={:.6g} sigma_rad={:.6g}", ctx.suffix, v.variance, std::sqrt(v.variance)));
}

void run_ber(CaseContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto c = make_constellation(cfg);
  const LoopParams params = effective_loop(cfg);
  const double tau = tau_of(cfg);
  double variance = 0.0;
  if (cfg.linewidth_hz > 0.0 && tau > 0.0) {
    const auto v = total_variance(cfg.linewidth_hz, tau, params);
    if (!v.converged) {
      throw NumericalError(fmt::format("phase-noise variance integral: {:.6g} vs {:.6g} at half density differ by > 1%",
                                       v.variance, v.coarse_variance));
    }
    variance = v.variance;
  }
  const double sigma = std::sqrt(variance);
  const auto metrics = bode_metrics(params);
  SweepMetadata meta{cfg.linewidth_hz, cfg.delta_l_m,
                     metrics && metrics->closed_loop_bw_hz ? *metrics->closed_loop_bw_hz : 0.0};
  const auto grid = snr_grid(cfg.run.snr_start_db, cfg.run.snr_stop_db, cfg.run.snr_step_db);
  const auto sweep = snr_sweep(c, sigma, grid, meta);
  if (!sweep.converged) throw NumericalError("BER quadrature: no 1% agreement under order doubling");

  CsvTable t{{"snr_db", "ber", "order", "m_ratio", "linewidth_hz", "delta_l_m", "loop_bw_hz", "ser"}, {}};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    t.rows.push_back({grid[k], sweep.ber[k], static_cast<double>(c.order()), c.m_ratio(), meta.linewidth_hz,
                      meta.delta_l_m, meta.loop_bw_hz, sweep.ser[k]});
  }
  ctx.write("ber", t, PlotKind::Ber);

  if (cfg.run.num_symbols > 0) {
    if (cfg.run.num_symbols < 10000) throw ConfigError("run.num_symbols: Monte Carlo needs at least 10000", 0);
    const double es = average_symbol_energy(c);
    CsvTable mc{{"snr_db", "ber", "ber_halfwidth", "ser", "ser_halfwidth", "symbols"}, {}};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const NoiseEnvironment env{es / std::pow(10.0, grid[k] / 10.0), sigma};
      const auto r = monte_carlo_ber(c, env, cfg.run.num_symbols, derive_seed(cfg.run.seed, k));
      mc.rows.push_back({grid[k], r.ber, r.ber_halfwidth, r.ser, r.ser_halfwidth, static_cast<double>(r.symbols)});
    }
    ctx.write("ber_mc", mc, PlotKind::Ber);
  }

  ctx.add("sigma_pn_rad", num(sigma));
  ctx.add("loop_bw_hz", num(meta.loop_bw_hz));
  ctx.add("fec_threshold_snr_db", sweep.fec_threshold_snr_db ? num(*sweep.fec_threshold_snr_db) : "none");
  ctx.result.messages.push_back(
      fmt::format("ber-sweep{}: sigma_pn_rad={:.6g} fec_threshold_snr_db={}", ctx.suffix, sigma,
                  sweep.fec_threshold_snr_db ? fmt::format("{:.4f}", *sweep.fec_threshold_snr_db) : "none"));
}

void run_lock(CaseContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto c = make_constellation(cfg);
  const LoopParams params = effective_loop(cfg);
  LockConfig lc;
  lc.duration_s = cfg.run.duration_s;
  lc.loop_decimation = cfg.run.loop_decimation;
  lc.averaging_cutoff_hz = cfg.run.averaging_cutoff_hz;
  lc.pattern = cfg.run.data_pattern;
  lc.actuator_range_rad = cfg.loop.actuator_range_rad;
  lc.record_stride = cfg.run.record_stride;
  const auto rep = simulate_lock(make_channel(cfg, c), c, params, cfg.loop.detector, lc);

  CsvTable t{{"time_s", "psi_rad", "delta_phi_rad", "error_v"}, {}};
  t.rows.reserve(rep.time_s.size());
  for (std::size_t k = 0; k < rep.time_s.size(); ++k) {
    t.rows.push_back({rep.time_s[k], rep.psi_rad[k], rep.delta_phi_rad[k], rep.error_v[k]});
  }
  ctx.write("lock", t, PlotKind::Lock);

  const double analytic = cfg.channel.phase_offset_rad / (1.0 + params.dc_gain());
  ctx.add("locked", rep.locked ? "true" : "false");
  ctx.add("lock_point_rad", num(rep.lock_point_rad));
  ctx.add("residual_rad", num(rep.residual_rad));
  ctx.add("residual_deg", num(rep.residual_rad * 180.0 / M_PI));
  ctx.add("peak_deviation_rad", num(rep.peak_deviation_rad));
  ctx.add("lock_time_s", rep.lock_time_s ? num(*rep.lock_time_s) : "none");
  ctx.add("analytic_static_error_rad", num(analytic));
  ctx.result.messages.push_back(fmt::format("lock{}: locked={} residual_rad={:.6g} lock_time_s={}", ctx.suffix,
                                            rep.locked, rep.residual_rad,
                                            rep.lock_time_s ? fmt::format("{:.4g}", *rep.lock_time_s) : "none"));
}

void run_trace(CaseContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto c = make_constellation(cfg);
  const auto tr = simulate_trace(make_channel(cfg, c), c, cfg.run.num_symbols, cfg.run.data_pattern);
  CsvTable t{{"time_s", "i", "q"}, {}};
  t.rows.reserve(tr.time_s.size());
  for (std::size_t k = 0; k < tr.time_s.size(); ++k) t.rows.push_back({tr.time_s[k], tr.i[k], tr.q[k]});
  ctx.write("trace", t, PlotKind::Trace);
  ctx.add("samples", std::to_string(tr.time_s.size()));
  ctx.add("dt_s", num(tr.dt));
  ctx.result.messages.push_back(fmt::format("trace{}: {} samples", ctx.suffix, tr.time_s.size()));
}

void run_case(CaseContext& ctx) {
  switch (ctx.cfg.run.mode) {
    case RunMode::Bode: run_bode(ctx); break;
    case RunMode::Psd: run_psd(ctx); break;
    case RunMode::BerSweep: run_ber(ctx); break;
    case RunMode::Lock: run_lock(ctx); break;
    case RunMode::Trace: run_trace(ctx); break;
  }
}

std::string leaf(const std::string& key) {
  const auto dot = key.rfind('.');
  return dot == std::string::npos ? key : key.substr(dot + 1);
}

}  // namespace

std::string tool_version() { return OCPR_VERSION; }

fs::path resolve_output_dir(const ScenarioConfig& cfg, const std::optional<std::string>& cli_out) {
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return cfg.run.output_dir;
}

OffsetQamConstellation make_constellation(const ScenarioConfig& cfg) {
  return build_constellation(cfg.modulation.order, cfg.modulation.a_oma, cfg.modulation.a0);
}

LoopParams effective_loop(const ScenarioConfig& cfg) {
  cfg.loop.params.validate();
  if (!cfg.loop.closed_loop_bw_hz) return cfg.loop.params;
  return scale_loop_bandwidth(cfg.loop.params, *cfg.loop.closed_loop_bw_hz);
}

double resolve_n0(const ScenarioConfig& cfg, const OffsetQamConstellation& c) {
  if (cfg.channel.n0) return *cfg.channel.n0;
  if (cfg.channel.snr_db) return average_symbol_energy(c) / std::pow(10.0, *cfg.channel.snr_db / 10.0);
  return 0.0;
}

RunResult run_scenario(const ScenarioConfig& cfg, const fs::path& output_dir) {
  RunResult result;
  result.output_dir = output_dir;
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec || !fs::is_directory(output_dir)) throw IoError("cannot create output directory " + output_dir.string());

  try {
    if (cfg.run.sweep) {
      for (double v : cfg.run.sweep->values) {
        const auto sub = with_sweep_value(cfg, cfg.run.sweep->key, v);
        const std::string tag = fmt::format("{}_{:g}", leaf(cfg.run.sweep->key), v);
        CaseContext ctx{sub, tag, "_" + tag, output_dir, result};
        run_case(ctx);
      }
    } else {
      CaseContext ctx{cfg, "", "", output_dir, result};
      run_case(ctx);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), 0);
  }

  fmt::memory_buffer s;
  fmt::format_to(std::back_inserter(s), "case,key,value\n");
  for (const auto& e : result.summary) fmt::format_to(std::back_inserter(s), "{},{},{}\n", e.tag, e.key, e.value);
  write_text_file(output_dir / "summary.csv", fmt::to_string(s));
  result.files.push_back("summary.csv");

  ScenarioConfig resolved = cfg;
  resolved.run.output_dir = output_dir.string();
  std::string manifest = to_yaml(resolved);
  manifest += "manifest:\n";
  manifest += fmt::format("  tool_version: \"{}\"\n", tool_version());
  manifest += fmt::format("  seed: {}\n", cfg.run.seed);
  manifest += "  outputs:\n";
  for (const auto& f : result.files) manifest += fmt::format("    - \"{}\"\n", f);
  write_text_file(output_dir / "manifest.yaml", manifest);
  result.files.push_back("manifest.yaml");
  return result;
}

}  // namespace ocpr::app
