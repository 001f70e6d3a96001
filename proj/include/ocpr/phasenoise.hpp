#pragma once

#include <optional>
#include <vector>

#include "ocpr/analysis.hpp"
#include "ocpr/cpr.hpp"

namespace ocpr {

// Two-sided PSD of Wiener laser phase: linewidth / (2 pi f^2). Throws at f == 0.
double laser_psd(double f_hz, double linewidth_hz);

// Beat-signal phase noise after the delay difference and the loop's error
// transfer: 2 S_laser(f) (1 - cos 2 pi f tau) / |1 + H(f)|^2.
// With no loop the |1 + H| factor is 1.
double shaped_psd(double f_hz, double linewidth_hz, double tau_s, const std::optional<RationalLoop>& loop);
double shaped_psd(double f_hz, double linewidth_hz, double tau_s, const LoopParams& params);

struct IntegrationLimits {
  double f_min_hz;
  double f_max_hz;
};

// f_min = max(1 Hz, 1e-3 crossover); f_max = max(100 crossover, 10/(2 pi tau)
// rounded up to a decade).
IntegrationLimits default_limits(double tau_s, const std::optional<RationalLoop>& loop);

struct VarianceResult {
  double variance = 0.0;         // rad^2 at the finer grid
  double coarse_variance = 0.0;  // same integral at half the grid density
  double points_per_decade = 0.0;
  bool converged = true;         // |fine - coarse| <= 1% of fine
  IntegrationLimits limits{};
};

// sigma^2 = 2 * integral of shaped_psd over [f_min, f_max] (trapezoid on a log
// grid) plus the closed-form high-frequency tail 2 linewidth / (pi f_max).
VarianceResult total_variance(double linewidth_hz, double tau_s, const std::optional<RationalLoop>& loop,
                              const IntegrationLimits& limits);
VarianceResult total_variance(double linewidth_hz, double tau_s, const std::optional<RationalLoop>& loop);
VarianceResult total_variance(double linewidth_hz, double tau_s, const LoopParams& params);

struct ShapedPhaseNoise {
  std::vector<double> freqs_hz;
  std::vector<double> psd;  // rad^2/Hz
  double variance = 0.0;
  double linewidth_hz = 0.0;
  double tau_s = 0.0;
  std::optional<LoopParams> loop;
};

ShapedPhaseNoise shaped_phase_noise(double linewidth_hz, double tau_s, const std::optional<LoopParams>& params,
                                    double f_lo_hz, double f_hi_hz, double points_per_decade);

}  // namespace ocpr
