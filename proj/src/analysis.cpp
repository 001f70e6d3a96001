#include "ocpr/analysis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ocpr/quadrature.hpp"

namespace ocpr {

namespace {

constexpr double kScanLo = 1.0;
constexpr double kScanHi = 100e6;
constexpr double kScanDensity = 200.0;

template <typename F>
double bisect(F&& f, double lo, double hi) {
  // f(lo) and f(hi) have opposite signs; search in log-frequency.
  double flo = f(lo);
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

}  // namespace

std::complex<double> RationalLoop::response(double f_hz) const {
  std::complex<double> h(dc_gain, 0.0);
  for (double z : zeros_hz) h *= std::complex<double>(1.0, f_hz / z);
  for (double p : poles_hz) h /= std::complex<double>(1.0, f_hz / p);
  return h;
}

double RationalLoop::phase_deg(double f_hz) const {
  double rad = dc_gain < 0.0 ? std::numbers::pi : 0.0;
  for (double z : zeros_hz) rad += std::atan(f_hz / z);
  for (double p : poles_hz) rad -= std::atan(f_hz / p);
  return rad * 180.0 / std::numbers::pi;
}

RationalLoop to_rational(const LoopParams& params) {
  params.validate();
  return {params.dc_gain(), {params.f_lf_z}, {params.f_lf_p, params.f_ps}};
}

std::complex<double> open_loop_response(const LoopParams& params, double f_hz) {
  return to_rational(params).response(f_hz);
}

std::complex<double> closed_loop_response(const RationalLoop& loop, double f_hz) {
  const auto h = loop.response(f_hz);
  return h / (1.0 + h);
}

std::complex<double> error_response(const RationalLoop& loop, double f_hz) {
  return 1.0 / (1.0 + loop.response(f_hz));
}

DetectorPhysics DetectorPhysics::from_fields(double e_iq_avg_mag, double e_lo_mag, double r_pd,
                                             double kv) {
  return {4.0 * e_iq_avg_mag * e_lo_mag * r_pd, kv, e_lo_mag, e_iq_avg_mag, r_pd};
}

double k_pd_from_physics(const DetectorPhysics& p) {
  return 2.0 * std::numbers::sqrt2 / std::numbers::pi * p.i0 * p.kv;
}

std::optional<BodeMetrics> bode_metrics(const RationalLoop& loop) {
  const auto grid = log_grid(kScanLo, kScanHi, kScanDensity);
  auto excess = [&](double f) { return std::log(loop.magnitude(f)); };

  std::optional<double> crossover;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (excess(grid[k]) >= 0.0 && excess(grid[k + 1]) < 0.0) {
      crossover = bisect(excess, grid[k], grid[k + 1]);
      break;
    }
  }
  if (!crossover) return std::nullopt;

  BodeMetrics m;
  m.crossover_hz = *crossover;
  m.phase_margin_deg = 180.0 + loop.phase_deg(*crossover);
  m.dc_gain = loop.dc_gain;

  if (m.phase_margin_deg > 0.0) {
    const double t0 = std::abs(closed_loop_response(loop, 0.0));
    auto drop = [&](double f) {
      return std::log(std::abs(closed_loop_response(loop, f)) / t0) + 0.5 * std::log(2.0);
    };
    const auto wide = log_grid(kScanLo, 1e3 * kScanHi, kScanDensity);
    for (std::size_t k = 0; k + 1 < wide.size(); ++k) {
      if (drop(wide[k]) >= 0.0 && drop(wide[k + 1]) < 0.0) {
        m.closed_loop_bw_hz = bisect(drop, wide[k], wide[k + 1]);
        break;
      }
    }
  }
  return m;
}

std::optional<BodeMetrics> bode_metrics(const LoopParams& params) {
  return bode_metrics(to_rational(params));
}

std::vector<BodePoint> bode_sweep(const RationalLoop& loop, double f_lo_hz, double f_hi_hz,
                                  double points_per_decade) {
  std::vector<BodePoint> out;
  for (double f : log_grid(f_lo_hz, f_hi_hz, points_per_decade)) {
    out.push_back({f, 20.0 * std::log10(loop.magnitude(f)), loop.phase_deg(f)});
  }
  return out;
}

StaticPhaseError static_phase_error(double phi0_rad, const LoopParams& params) {
  params.validate();
  return {phi0_rad / (1.0 + params.dc_gain()), std::abs(phi0_rad) <= std::numbers::pi / 4.0 + 1e-12};
}

LoopParams scale_loop_bandwidth(const LoopParams& params, double target_hz) {
  if (!(target_hz > 0.0)) throw std::invalid_argument("target loop bandwidth must be positive");
  const auto metrics = bode_metrics(params);
  if (!metrics || !metrics->closed_loop_bw_hz) {
    throw std::invalid_argument("loop has no closed-loop bandwidth to scale");
  }
  // The closed loop is a function of f / (corner frequencies) only, so scaling
  // every corner by k scales the bandwidth by exactly k.
  const double k = target_hz / *metrics->closed_loop_bw_hz;
  LoopParams out = params;
  out.f_lf_z *= k;
  out.f_lf_p *= k;
  out.f_ps *= k;
  return out;
}

}  // namespace ocpr
