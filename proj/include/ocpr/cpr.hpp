#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ocpr/channel.hpp"
#include "ocpr/constellation.hpp"

namespace ocpr {

/// Gains and corner frequencies of the CPR feedback loop.
///
/// Open loop: H(s) = k_pd * k_driver * k_lf (1 + s/w_z)/(1 + s/w_p) * k_ps/(1 + s/w_ps).
struct LoopParams {
  double k_pd = 2.55e-2;    // V/rad
  double k_lf = 1.2e3;      // V/V
  double k_driver = 2.0;    // V/V
  double k_ps = 15.7;       // rad/V
  double f_lf_z = 0.8e6;    // Hz, loop-filter zero
  double f_lf_p = 6e3;      // Hz, loop-filter pole
  double f_ps = 2e3;        // Hz, phase-shifter pole

  // Defaults are the reference thermal-shifter design.
  static LoopParams reference() { return {}; }

  void validate() const;  // throws std::invalid_argument unless every field > 0
  double dc_gain() const { return k_pd * k_lf * k_driver * k_ps; }
};

enum class DetectorMethod { Method1, Method2 };

// Select-and-subtract detector: -sign(i + q) * (i - q).
double error_method1(double i_avg, double q_avg);
// Limiter/mixer detector: sign(i) * q - sign(q) * i. Period pi/2 in the phase error.
double error_method2(double i_avg, double q_avg);
double detector_error(DetectorMethod method, double i_avg, double q_avg);

// Method 1 with a hysteretic select comparator on i + q.
class Method1Detector {
 public:
  explicit Method1Detector(double hysteresis) : hysteresis_(hysteresis) {}
  double operator()(double i_avg, double q_avg);

 private:
  double hysteresis_;
  int select_ = 0;
};

struct AveragedIq {
  std::vector<double> i;
  std::vector<double> q;
};

// Single-pole low-pass of both rails; mirrors the averaging capacitors ahead of the detector.
AveragedIq lowpass_average(std::span<const double> i_trace, std::span<const double> q_trace,
                           double dt, double cutoff_hz);

struct LoopState {
  double filter_state = 0.0;
  double shifter_state = 0.0;
  double psi = 0.0;                       // applied phase, rad
  std::optional<double> actuator_range;  // |psi| limit, rad
};

// One trapezoidal step of k_lf (1 + s/w_z)/(1 + s/w_p). Returns the filter output in V.
double step_loop_filter(LoopState& state, double input_v, double dt, const LoopParams& params);
// One trapezoidal step of k_ps/(1 + s/w_ps); updates and returns state.psi (clamped if limited).
double step_phase_shifter(LoopState& state, double input_v, double dt, const LoopParams& params);

enum class DataPath {
  SymbolLevel,  // NRZ symbol stream through PD and averaging filters
  Averaged,     // ideal averaged rails A0 (cos +/- sin) evaluated at the loop rate
};

struct LockConfig {
  double duration_s = 300e-6;
  int loop_decimation = 1000;  // symbols per loop update
  double averaging_cutoff_hz = 1e9;
  DataPattern pattern = DataPattern::Balanced;
  DataPath path = DataPath::SymbolLevel;
  std::optional<double> actuator_range_rad;
  double hysteresis_fraction = 0.01;  // of 2*A0
  std::size_t record_stride = 1;      // loop steps per recorded row
  // Extra input phase (rad) as a function of time, held over each loop step.
  std::function<double(double)> input_phase_modulation;
};

struct LockReport {
  double loop_dt_s = 0.0;
  std::vector<double> time_s;
  std::vector<double> psi_rad;
  std::vector<double> delta_phi_rad;  // phi_in + psi, averaged over each loop step
  std::vector<double> error_v;        // detector output entering the loop filter
  double residual_rad = 0.0;          // mean over the final 10% about the lock point
  double peak_deviation_rad = 0.0;    // max |delta_phi - lock point| over the final 10%
  double lock_point_rad = 0.0;
  std::optional<double> lock_time_s;  // from then on |delta_phi - lock point| < 1 deg
  bool locked = false;
};

// Closed-loop lock transient. The phase shifter adds psi to the Rx/LO phase
// difference, delta_phi = phase_offset + beat noise + psi; the detector output
// is scaled by k_pd / (2 A0) so its small-signal slope is -k_pd.
LockReport simulate_lock(const ChannelScenario& scenario, const OffsetQamConstellation& c,
                         const LoopParams& params, DetectorMethod method, const LockConfig& config);

}  // namespace ocpr
