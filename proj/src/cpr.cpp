#include "ocpr/cpr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ocpr/filters.hpp"
#include "ocpr/rng.hpp"

namespace ocpr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kOneDegree = std::numbers::pi / 180.0;

inline double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

struct Bilinear1 {
  double b0, b1, a1;
};

// k (1 + s/wz) / (1 + s/wp) with s -> (2/dt)(1 - z^-1)/(1 + z^-1).
Bilinear1 lead_lag(double k, double wz, double wp, double dt) {
  const double c = 2.0 / dt;
  const double den = 1.0 + c / wp;
  return {k * (1.0 + c / wz) / den, k * (1.0 - c / wz) / den, (1.0 - c / wp) / den};
}

Bilinear1 one_pole(double k, double wp, double dt) {
  const double c = 2.0 / dt;
  const double den = 1.0 + c / wp;
  return {k / den, k / den, (1.0 - c / wp) / den};
}

double wrap_to_pi(double x) { return std::remainder(x, kTwoPi); }

}  // namespace

void LoopParams::validate() const {
  const double fields[] = {k_pd, k_lf, k_driver, k_ps, f_lf_z, f_lf_p, f_ps};
  for (double v : fields) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("loop parameters must all be positive and finite");
    }
  }
}

double error_method1(double i_avg, double q_avg) { return -sgn(i_avg + q_avg) * (i_avg - q_avg); }

double error_method2(double i_avg, double q_avg) { return sgn(i_avg) * q_avg - sgn(q_avg) * i_avg; }

double detector_error(DetectorMethod method, double i_avg, double q_avg) {
  return method == DetectorMethod::Method1 ? error_method1(i_avg, q_avg)
                                           : error_method2(i_avg, q_avg);
}

double Method1Detector::operator()(double i_avg, double q_avg) {
  const double sum = i_avg + q_avg;
  if (select_ == 0) {
    select_ = sum < 0.0 ? -1 : 1;
  } else if (sum > hysteresis_) {
    select_ = 1;
  } else if (sum < -hysteresis_) {
    select_ = -1;
  }
  return -static_cast<double>(select_) * (i_avg - q_avg);
}

AveragedIq lowpass_average(std::span<const double> i_trace, std::span<const double> q_trace,
                           double dt, double cutoff_hz) {
  if (i_trace.size() != q_trace.size()) throw std::invalid_argument("lowpass_average: rail length mismatch");
  if (!(cutoff_hz > 0.0) || !(dt > 0.0)) throw std::invalid_argument("lowpass_average: need dt, cutoff > 0");
  OnePoleLowpass li(cutoff_hz, dt);
  OnePoleLowpass lq(cutoff_hz, dt);
  AveragedIq out{std::vector<double>(i_trace.size()), std::vector<double>(q_trace.size())};
  for (std::size_t k = 0; k < i_trace.size(); ++k) {
    out.i[k] = li.step(i_trace[k]);
    out.q[k] = lq.step(q_trace[k]);
  }
  return out;
}

double step_loop_filter(LoopState& state, double input_v, double dt, const LoopParams& params) {
  const auto f = lead_lag(params.k_lf, kTwoPi * params.f_lf_z, kTwoPi * params.f_lf_p, dt);
  const double y = f.b0 * input_v + state.filter_state;
  state.filter_state = f.b1 * input_v - f.a1 * y;
  return y;
}

double step_phase_shifter(LoopState& state, double input_v, double dt, const LoopParams& params) {
  const auto f = one_pole(params.k_ps, kTwoPi * params.f_ps, dt);
  double y = f.b0 * input_v + state.shifter_state;
  if (state.actuator_range) y = std::clamp(y, -*state.actuator_range, *state.actuator_range);
  state.shifter_state = f.b1 * input_v - f.a1 * y;
  state.psi = y;
  return y;
}

LockReport simulate_lock(const ChannelScenario& scenario, const OffsetQamConstellation& c,
                         const LoopParams& params, DetectorMethod method, const LockConfig& config) {
  params.validate();
  if (!(c.a0() > 0.0)) throw std::invalid_argument("simulate_lock: offset A0 must be positive");
  if (config.loop_decimation < 1) throw std::invalid_argument("simulate_lock: loop_decimation must be >= 1");
  if (scenario.samples_per_symbol < 1) throw std::invalid_argument("simulate_lock: samples_per_symbol must be >= 1");
  if (!(config.duration_s > 0.0)) throw std::invalid_argument("simulate_lock: duration must be positive");

  const double a0 = c.a0();
  const double detector_gain = params.k_pd / (2.0 * a0);  // V per field unit
  const double dt_loop = config.loop_decimation / scenario.baud_rate_hz;
  const auto steps = static_cast<std::size_t>(std::ceil(config.duration_s / dt_loop - 1e-9));
  const std::size_t tail_begin = steps - std::max<std::size_t>(1, steps / 10);
  const std::size_t stride = std::max<std::size_t>(1, config.record_stride);

  const bool symbol_level = config.path == DataPath::SymbolLevel;
  const int sps = scenario.samples_per_symbol;
  const double dt_sample = symbol_level ? 1.0 / (scenario.baud_rate_hz * sps) : dt_loop;

  // Beat phase noise phi(t) - phi(t - tau), generated on the fly through a delay ring.
  const double tau = scenario.mismatch.tau();
  const bool noisy_phase = scenario.laser.linewidth_hz > 0.0 && tau > 0.0;
  const std::size_t delay = noisy_phase ? delay_samples(tau, dt_sample) : 0;
  std::vector<double> ring(delay + 1, scenario.laser.initial_phase_rad);
  std::size_t ring_pos = 0;
  const double pn_sigma = std::sqrt(kTwoPi * scenario.laser.linewidth_hz * dt_sample);
  Rng pn_rng(scenario.seed, 0x504E);
  double laser_phase = scenario.laser.initial_phase_rad;
  auto next_beat = [&]() {
    laser_phase += pn_sigma * pn_rng.normal();
    ring[ring_pos] = laser_phase;
    ring_pos = ring_pos == delay ? 0 : ring_pos + 1;
    return laser_phase - ring[ring_pos];
  };

  const bool awgn = scenario.n0 && *scenario.n0 > 0.0;
  const double awgn_sigma = awgn ? std::sqrt(*scenario.n0 / 2.0) : 0.0;
  Rng awgn_rng(scenario.seed, 0x4157);

  SymbolSource source(c, config.pattern, scenario.seed, 0x5359);
  Method1Detector m1(config.hysteresis_fraction * 2.0 * a0);
  auto detect = [&](double i, double q) {
    return method == DetectorMethod::Method1 ? m1(i, q) : error_method2(i, q);
  };

  OnePoleLowpass pd_i, pd_q;
  const bool pd = symbol_level && scenario.pd_bandwidth_hz.has_value();
  if (pd) {
    pd_i = OnePoleLowpass(*scenario.pd_bandwidth_hz, dt_sample);
    pd_q = OnePoleLowpass(*scenario.pd_bandwidth_hz, dt_sample);
  }
  OnePoleLowpass avg_i(config.averaging_cutoff_hz, dt_sample);
  OnePoleLowpass avg_q(config.averaging_cutoff_hz, dt_sample);
  {
    const double p0 = scenario.phase_offset_rad;
    avg_i.settle(a0 * (std::cos(p0) + std::sin(p0)));
    avg_q.settle(a0 * (std::cos(p0) - std::sin(p0)));
  }

  LoopState state;
  state.actuator_range = config.actuator_range_rad;

  LockReport report;
  report.loop_dt_s = dt_loop;
  const std::size_t rows = (steps + stride - 1) / stride;
  report.time_s.reserve(rows);
  report.psi_rad.reserve(rows);
  report.delta_phi_rad.reserve(rows);
  report.error_v.reserve(rows);
  std::vector<double> tail;
  tail.reserve(steps - tail_begin);

  const double samples_per_step = symbol_level ? static_cast<double>(config.loop_decimation) * sps : 1.0;

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt_loop;
    double base = scenario.phase_offset_rad + state.psi;
    if (config.input_phase_modulation) base += config.input_phase_modulation(t);

    double err_sum = 0.0;
    double phase_sum = 0.0;
    if (symbol_level) {
      double cb = std::cos(base);
      double sb = std::sin(base);
      for (int s = 0; s < config.loop_decimation; ++s) {
        const IqPoint p = c.point(source.next());
        for (int j = 0; j < sps; ++j) {
          double phase = base;
          double cs = cb;
          double sn = sb;
          if (noisy_phase) {
            phase += next_beat();
            cs = std::cos(phase);
            sn = std::sin(phase);
          }
          double ii = p.i * cs + p.q * sn;
          double qq = p.q * cs - p.i * sn;
          if (awgn) {
            ii += awgn_sigma * awgn_rng.normal();
            qq += awgn_sigma * awgn_rng.normal();
          }
          if (pd) {
            ii = pd_i.step(ii);
            qq = pd_q.step(qq);
          }
          err_sum += detect(avg_i.step(ii), avg_q.step(qq));
          phase_sum += phase;
        }
      }
    } else {
      const double phase = base + (noisy_phase ? next_beat() : 0.0);
      const double cs = std::cos(phase);
      const double sn = std::sin(phase);
      err_sum = detect(a0 * (cs + sn), a0 * (cs - sn));
      phase_sum = phase;
    }

    const double error_v = detector_gain * err_sum / samples_per_step;
    const double delta_phi = phase_sum / samples_per_step;
    const double lf = step_loop_filter(state, error_v, dt_loop, params);
    step_phase_shifter(state, params.k_driver * lf, dt_loop, params);

    if (k % stride == 0 || k + 1 == steps) {
      report.time_s.push_back(t + dt_loop);
      report.psi_rad.push_back(state.psi);
      report.delta_phi_rad.push_back(delta_phi);
      report.error_v.push_back(error_v);
    }
    if (k >= tail_begin) tail.push_back(delta_phi);
  }

  // Method 1 locks at multiples of pi, Method 2 at multiples of pi/2.
  const double period = method == DetectorMethod::Method1 ? std::numbers::pi : std::numbers::pi / 2.0;
  double tail_mean = 0.0;
  for (double v : tail) tail_mean += v;
  tail_mean /= static_cast<double>(tail.size());
  report.lock_point_rad = period * std::round(tail_mean / period);
  double dev_sum = 0.0;
  for (double v : tail) {
    const double d = wrap_to_pi(v - report.lock_point_rad);
    dev_sum += d;
    report.peak_deviation_rad = std::max(report.peak_deviation_rad, std::abs(d));
  }
  report.residual_rad = dev_sum / static_cast<double>(tail.size());
  report.locked = std::abs(report.residual_rad) < kOneDegree &&
                  report.peak_deviation_rad < std::numbers::pi / 8.0;

  for (std::size_t r = report.delta_phi_rad.size(); r-- > 0;) {
    if (std::abs(wrap_to_pi(report.delta_phi_rad[r] - report.lock_point_rad)) >= kOneDegree) {
      if (r + 1 < report.time_s.size()) report.lock_time_s = report.time_s[r + 1];
      break;
    }
    if (r == 0) report.lock_time_s = 0.0;
  }
  if (!report.locked) report.lock_time_s.reset();
  return report;
}

}  // namespace ocpr
