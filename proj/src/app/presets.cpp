#include "ocpr/app/presets.hpp"

#include <algorithm>

namespace ocpr::app {

namespace {

std::vector<Preset> build() {
  std::vector<Preset> p = {
      {"table1_bode", "Open-loop Bode response of the reference loop, 1 Hz to 100 MHz",
       R"(name: table1_bode
run:
  mode: bode
  f_min_hz: 1
  f_max_hz: 1.0e8
  points_per_decade: 200
  output_dir: table1_bode
)"},
      {"fig6_psd", "Shaped beat phase-noise PSD for several closed-loop bandwidths (1 MHz linewidth, 10 cm)",
       R"(name: fig6_psd
laser:
  linewidth_hz: 1.0e6
mismatch:
  delta_l_m: 0.1
run:
  mode: psd
  f_min_hz: 1.0e2
  f_max_hz: 1.0e10
  points_per_decade: 50
  sweep:
    key: loop.closed_loop_bw_hz
    values: [1.0e5, 1.0e6, 1.0e7, 1.0e8]
  output_dir: fig6_psd
)"},
      {"fig9a_offset", "16-offset-QAM BER vs SNR for several carrier offsets A0/A_OMA",
       R"(name: fig9a_offset
modulation:
  order: 16
laser:
  linewidth_hz: 1.0e6
mismatch:
  delta_l_m: 0.1
run:
  mode: ber-sweep
  snr_grid_db: {start: 4, stop: 30, step: 0.25}
  sweep:
    key: modulation.m_ratio
    values: [0.0, 0.05, 0.1, 0.2]
  output_dir: fig9a_offset
)"},
      {"fig9b_loop_bw", "16-offset-QAM BER vs SNR for closed-loop bandwidths 10 MHz and 100 MHz",
       R"(name: fig9b_loop_bw
modulation:
  order: 16
laser:
  linewidth_hz: 1.0e6
mismatch:
  delta_l_m: 0.1
run:
  mode: ber-sweep
  snr_grid_db: {start: 4, stop: 30, step: 0.25}
  sweep:
    key: loop.closed_loop_bw_hz
    values: [1.0e7, 1.0e8]
  output_dir: fig9b_loop_bw
)"},
      {"fig9c_linewidth_4qam", "4-offset-QAM BER vs SNR for linewidths 100 kHz to 10 MHz",
       R"(name: fig9c_linewidth_4qam
modulation:
  order: 4
mismatch:
  delta_l_m: 0.1
run:
  mode: ber-sweep
  snr_grid_db: {start: 4, stop: 24, step: 0.25}
  sweep:
    key: laser.linewidth_hz
    values: [1.0e5, 1.0e6, 1.0e7]
  output_dir: fig9c_linewidth_4qam
)"},
      {"fig9_linewidth_16qam", "16-offset-QAM BER vs SNR for linewidths 100 kHz, 500 kHz, 1 MHz, 10 MHz",
       R"(name: fig9_linewidth_16qam
modulation:
  order: 16
mismatch:
  delta_l_m: 0.1
run:
  mode: ber-sweep
  snr_grid_db: {start: 4, stop: 30, step: 0.25}
  sweep:
    key: laser.linewidth_hz
    values: [1.0e5, 5.0e5, 1.0e6, 1.0e7]
  output_dir: fig9_linewidth_16qam
)"},
      {"fig9d_mismatch", "16-offset-QAM BER vs SNR for path mismatch 0 to 20 cm",
       R"(name: fig9d_mismatch
modulation:
  order: 16
laser:
  linewidth_hz: 1.0e6
run:
  mode: ber-sweep
  snr_grid_db: {start: 4, stop: 30, step: 0.25}
  sweep:
    key: mismatch.delta_l_m
    values: [0.0, 0.05, 0.1, 0.2]
  output_dir: fig9d_mismatch
)"},
      {"lock_4qam", "Lock transient from a pi/4 offset, 4-offset-QAM at 100 GBaud",
       R"(name: lock_4qam
modulation:
  order: 4
laser:
  linewidth_hz: 0
channel:
  phase_offset_rad: 0.7853981633974483
  pd_bandwidth_hz: 5.0e10
run:
  mode: lock
  duration_s: 3.0e-4
  output_dir: lock_4qam
)"},
      {"lock_16qam", "Lock transient from a pi/4 offset, 16-offset-QAM with the same loop",
       R"(name: lock_16qam
modulation:
  order: 16
laser:
  linewidth_hz: 0
channel:
  phase_offset_rad: 0.7853981633974483
  pd_bandwidth_hz: 5.0e10
run:
  mode: lock
  duration_s: 3.0e-4
  output_dir: lock_16qam
)"},
      {"trace_4qam", "Received I/Q waveform, 4-offset-QAM, 1 MHz linewidth, 20 dB SNR",
       R"(name: trace_4qam
modulation:
  order: 4
laser:
  linewidth_hz: 1.0e6
mismatch:
  delta_l_m: 0.1
channel:
  snr_db: 20
  pd_bandwidth_hz: 5.0e10
  samples_per_symbol: 8
run:
  mode: trace
  num_symbols: 2000
  output_dir: trace_4qam
)"},
  };
  std::sort(p.begin(), p.end(), [](const Preset& a, const Preset& b) { return a.name < b.name; });
  return p;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build();
  return all;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

}  // namespace ocpr::app
