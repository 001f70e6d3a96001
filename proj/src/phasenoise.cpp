#include "ocpr/phasenoise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ocpr/quadrature.hpp"

namespace ocpr {

namespace {

constexpr double kMinDensity = 200.0;

double trapezoid_log(double linewidth_hz, double tau_s, const std::optional<RationalLoop>& loop,
                     const IntegrationLimits& lim, double density) {
  const auto grid = log_grid(lim.f_min_hz, lim.f_max_hz, density);
  double sum = 0.0;
  double prev = shaped_psd(grid.front(), linewidth_hz, tau_s, loop);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double cur = shaped_psd(grid[k], linewidth_hz, tau_s, loop);
    sum += 0.5 * (prev + cur) * (grid[k] - grid[k - 1]);
    prev = cur;
  }
  return sum;
}

}  // namespace

double laser_psd(double f_hz, double linewidth_hz) {
  if (f_hz == 0.0) throw std::invalid_argument("laser_psd: singular at f = 0");
  return linewidth_hz / (2.0 * std::numbers::pi * f_hz * f_hz);
}

double shaped_psd(double f_hz, double linewidth_hz, double tau_s, const std::optional<RationalLoop>& loop) {
  const double x = 2.0 * std::numbers::pi * f_hz * tau_s;
  // 1 - cos x = 2 sin^2(x/2), exact near x = 0.
  const double s = std::sin(0.5 * x);
  double value = 2.0 * laser_psd(f_hz, linewidth_hz) * 2.0 * s * s;
  if (loop) value /= std::norm(1.0 + loop->response(f_hz));
  return value;
}

double shaped_psd(double f_hz, double linewidth_hz, double tau_s, const LoopParams& params) {
  return shaped_psd(f_hz, linewidth_hz, tau_s, std::optional<RationalLoop>(to_rational(params)));
}

IntegrationLimits default_limits(double tau_s, const std::optional<RationalLoop>& loop) {
  double crossover = 0.0;
  if (loop) {
    if (auto m = bode_metrics(*loop)) crossover = m->crossover_hz;
  }
  const double f_min = std::max(1.0, 1e-3 * crossover);
  double f_tau = 0.0;
  if (tau_s > 0.0) {
    f_tau = std::pow(10.0, std::ceil(std::log10(10.0 / (2.0 * std::numbers::pi * tau_s))));
  }
  const double f_max = std::max({100.0 * crossover, f_tau, 10.0 * f_min});
  return {f_min, f_max};
}

VarianceResult total_variance(double linewidth_hz, double tau_s, const std::optional<RationalLoop>& loop,
                              const IntegrationLimits& limits) {
  if (!(limits.f_min_hz > 0.0) || !(limits.f_max_hz > limits.f_min_hz)) {
    throw std::invalid_argument("total_variance: need 0 < f_min < f_max");
  }
  if (!(linewidth_hz >= 0.0) || !(tau_s >= 0.0)) {
    throw std::invalid_argument("total_variance: linewidth and tau must be >= 0");
  }
  VarianceResult r;
  r.limits = limits;
  if (linewidth_hz == 0.0 || tau_s == 0.0) return r;

  // Resolve the 1/tau ripple of (1 - cos) at the top of the band: about 16
  // points per ripple period there.
  const double ripple = 16.0 * tau_s * limits.f_max_hz * std::log(10.0);
  const double density = std::max(kMinDensity, std::ceil(ripple));
  // Above f_max, (1 - cos) averages to 1 and |1 + H| -> 1.
  const double tail = 2.0 * linewidth_hz / (std::numbers::pi * limits.f_max_hz);

  r.coarse_variance = 2.0 * trapezoid_log(linewidth_hz, tau_s, loop, limits, density) + tail;
  r.variance = 2.0 * trapezoid_log(linewidth_hz, tau_s, loop, limits, 2.0 * density) + tail;
  r.points_per_decade = 2.0 * density;
  r.converged = std::abs(r.variance - r.coarse_variance) <= 0.01 * std::abs(r.variance);
  return r;
}

VarianceResult total_variance(double linewidth_hz, double tau_s, const std::optional<RationalLoop>& loop) {
  return total_variance(linewidth_hz, tau_s, loop, default_limits(tau_s, loop));
}

VarianceResult total_variance(double linewidth_hz, double tau_s, const LoopParams& params) {
  return total_variance(linewidth_hz, tau_s, std::optional<RationalLoop>(to_rational(params)));
}

ShapedPhaseNoise shaped_phase_noise(double linewidth_hz, double tau_s, const std::optional<LoopParams>& params,
                                    double f_lo_hz, double f_hi_hz, double points_per_decade) {
  std::optional<RationalLoop> loop;
  if (params) loop = to_rational(*params);
  ShapedPhaseNoise out;
  out.freqs_hz = log_grid(f_lo_hz, f_hi_hz, points_per_decade);
  out.psd.reserve(out.freqs_hz.size());
  for (double f : out.freqs_hz) out.psd.push_back(shaped_psd(f, linewidth_hz, tau_s, loop));
  out.variance = total_variance(linewidth_hz, tau_s, loop).variance;
  out.linewidth_hz = linewidth_hz;
  out.tau_s = tau_s;
  out.loop = params;
  return out;
}

}  // namespace ocpr
