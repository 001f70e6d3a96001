#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "ocpr/cpr.hpp"

namespace ocpr {

// Open-loop gain with real zeros and poles: G prod(1 + jf/z) / prod(1 + jf/p).
struct RationalLoop {
  double dc_gain = 1.0;
  std::vector<double> zeros_hz;
  std::vector<double> poles_hz;

  std::complex<double> response(double f_hz) const;
  double magnitude(double f_hz) const { return std::abs(response(f_hz)); }
  // Phase from the factor decomposition (sum of atan terms), no 2*pi wrapping.
  double phase_deg(double f_hz) const;
};

RationalLoop to_rational(const LoopParams& params);

std::complex<double> open_loop_response(const LoopParams& params, double f_hz);
// H / (1 + H)
std::complex<double> closed_loop_response(const RationalLoop& loop, double f_hz);
// 1 / (1 + H), the phase-error transfer function.
std::complex<double> error_response(const RationalLoop& loop, double f_hz);

struct DetectorPhysics {
  double i0 = 0.0;            // average photocurrent, A
  double kv = 0.0;            // current-to-voltage gain, V/A
  double e_lo_mag = 0.0;      // |E_LO|
  double e_iq_avg_mag = 0.0;  // |mean E_I/Q|; equals A0 for DC-balanced data
  double r_pd = 0.0;          // responsivity

  // i0 = 4 |E_I/Q| |E_LO| R_PD
  static DetectorPhysics from_fields(double e_iq_avg_mag, double e_lo_mag, double r_pd, double kv);
};

// (2 sqrt 2 / pi) * i0 * kv
double k_pd_from_physics(const DetectorPhysics& p);

struct BodeMetrics {
  double crossover_hz = 0.0;
  double phase_margin_deg = 0.0;
  std::optional<double> closed_loop_bw_hz;  // -3 dB of |H/(1+H)| relative to DC; needs PM > 0
  double dc_gain = 0.0;
};

// Unity-gain crossing from a 1 Hz - 100 MHz log scan (200/decade) refined by
// bisection. Empty when |H| never crosses 1 in that range.
std::optional<BodeMetrics> bode_metrics(const RationalLoop& loop);
std::optional<BodeMetrics> bode_metrics(const LoopParams& params);

struct BodePoint {
  double f_hz;
  double mag_db;
  double phase_deg;
};
std::vector<BodePoint> bode_sweep(const RationalLoop& loop, double f_lo_hz, double f_hi_hz,
                                  double points_per_decade);

struct StaticPhaseError {
  double error_rad = 0.0;
  bool linear_region = true;  // false when |phi0| > pi/4
};

// phi0 / (1 + H(0))
StaticPhaseError static_phase_error(double phi0_rad, const LoopParams& params);

// Scales all three corner frequencies so the closed-loop bandwidth equals target_hz.
LoopParams scale_loop_bandwidth(const LoopParams& params, double target_hz);

}  // namespace ocpr
