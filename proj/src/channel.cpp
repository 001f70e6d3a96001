#include "ocpr/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ocpr/filters.hpp"
#include "ocpr/rng.hpp"

namespace ocpr {

PathMismatch::PathMismatch(double delta_l_m, double refractive_index)
    : delta_l_(delta_l_m), refractive_index_(refractive_index) {
  if (!(delta_l_m >= 0.0)) throw std::invalid_argument("path mismatch delta_l must be >= 0");
  if (!(refractive_index > 0.0)) throw std::invalid_argument("refractive index must be positive");
}

PhaseNoisePath generate_phase_noise(const LaserModel& laser, double dt, std::size_t count,
                                    std::uint64_t seed) {
  if (!(dt > 0.0)) throw std::invalid_argument("generate_phase_noise: dt must be positive");
  if (count == 0) throw std::invalid_argument("generate_phase_noise: count must be >= 1");
  if (!(laser.linewidth_hz >= 0.0)) throw std::invalid_argument("laser linewidth must be >= 0");

  PhaseNoisePath path{dt, std::vector<double>(count), seed};
  const double step_sigma = std::sqrt(2.0 * std::numbers::pi * laser.linewidth_hz * dt);
  Rng rng(seed, 0x5057);
  double phi = laser.initial_phase_rad;
  path.samples[0] = phi;
  for (std::size_t k = 1; k < count; ++k) {
    if (step_sigma > 0.0) phi += step_sigma * rng.normal();
    path.samples[k] = phi;
  }
  return path;
}

std::size_t delay_samples(double tau, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("delay_samples: dt must be positive");
  if (tau <= 0.0) return 0;
  const double ratio = tau / dt;
  const double rounded = std::round(ratio);
  const bool exact = std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio);
  if (!exact && ratio < 4.0) {
    throw std::invalid_argument("differential delay " + std::to_string(tau) +
                                " s is not resolved by dt = " + std::to_string(dt) +
                                " s (need dt <= tau/4 or tau a multiple of dt)");
  }
  return static_cast<std::size_t>(rounded);
}

BeatPhase beat_phase(const PhaseNoisePath& path, const PathMismatch& mismatch, double phi_offset) {
  const std::size_t delay = delay_samples(mismatch.tau(), path.dt);
  BeatPhase beat{path.dt, std::vector<double>(path.samples.size())};
  const auto& s = path.samples;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double delayed = k >= delay ? s[k - delay] : s.front();
    beat.samples[k] = phi_offset + s[k] - delayed;
  }
  return beat;
}

IqPoint rotate_symbol(double i, double q, double a0, double delta_phi) {
  const double c = std::cos(delta_phi);
  const double s = std::sin(delta_phi);
  const double ia = i + a0;
  const double qa = q + a0;
  return {ia * c + qa * s, qa * c - ia * s};
}

std::vector<double> add_awgn(std::span<const double> values, double n0, std::uint64_t seed) {
  if (!(n0 >= 0.0)) throw std::invalid_argument("add_awgn: n0 must be >= 0");
  std::vector<double> out(values.begin(), values.end());
  if (n0 == 0.0) return out;
  const double sigma = std::sqrt(n0 / 2.0);
  Rng rng(seed, 0xA3C5);
  for (auto& v : out) v += sigma * rng.normal();
  return out;
}

std::vector<double> pd_filter(std::span<const double> trace, double dt, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("pd_filter: bandwidth must be positive");
  OnePoleLowpass lp(bandwidth_hz, dt);
  std::vector<double> out(trace.size());
  for (std::size_t k = 0; k < trace.size(); ++k) out[k] = lp.step(trace[k]);
  return out;
}

SymbolSource::SymbolSource(const OffsetQamConstellation& c, DataPattern pattern,
                           std::uint64_t seed, std::uint64_t stream)
    : order_(static_cast<std::size_t>(c.order())),
      pattern_(pattern),
      block_(order_),
      pos_(order_),
      engine_state_(derive_seed(seed, stream)) {
  for (std::size_t k = 0; k < order_; ++k) block_[k] = k;
}

std::uint64_t SymbolSource::next_bits() {
  engine_state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = engine_state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::size_t SymbolSource::next() {
  if (pattern_ == DataPattern::Iid) return static_cast<std::size_t>(next_bits() & (order_ - 1));
  if (pos_ == order_) {
    // Fisher-Yates over the block; order_ <= 256 so the multiply-shift bias is negligible.
    for (std::size_t k = order_ - 1; k > 0; --k) {
      const auto j = static_cast<std::size_t>(((next_bits() >> 32) * (k + 1)) >> 32);
      std::swap(block_[k], block_[j]);
    }
    pos_ = 0;
  }
  return block_[pos_++];
}

Trace simulate_trace(const ChannelScenario& scenario, const OffsetQamConstellation& c,
                     std::size_t num_symbols, DataPattern pattern) {
  if (scenario.samples_per_symbol < 1) throw std::invalid_argument("samples_per_symbol must be >= 1");
  const int sps = scenario.samples_per_symbol;
  const double dt = 1.0 / (scenario.baud_rate_hz * sps);
  const std::size_t n = num_symbols * static_cast<std::size_t>(sps);

  std::vector<double> theta(n, scenario.phase_offset_rad);
  if (scenario.laser.linewidth_hz > 0.0 && scenario.mismatch.tau() > 0.0) {
    const auto path = generate_phase_noise(scenario.laser, dt, n, scenario.seed);
    theta = beat_phase(path, scenario.mismatch, scenario.phase_offset_rad).samples;
  }

  SymbolSource source(c, pattern, scenario.seed, 0x5359);
  Trace tr;
  tr.dt = dt;
  tr.time_s.resize(n);
  tr.i.resize(n);
  tr.q.resize(n);
  const double a0 = c.a0();
  std::size_t k = 0;
  for (std::size_t s = 0; s < num_symbols; ++s) {
    const IqPoint p = c.point(source.next());
    for (int j = 0; j < sps; ++j, ++k) {
      const IqPoint r = rotate_symbol(p.i - a0, p.q - a0, a0, theta[k]);
      tr.time_s[k] = static_cast<double>(k) * dt;
      tr.i[k] = r.i;
      tr.q[k] = r.q;
    }
  }
  if (scenario.n0 && *scenario.n0 > 0.0) {
    tr.i = add_awgn(tr.i, *scenario.n0, derive_seed(scenario.seed, 1));
    tr.q = add_awgn(tr.q, *scenario.n0, derive_seed(scenario.seed, 2));
  }
  if (scenario.pd_bandwidth_hz) {
    tr.i = pd_filter(tr.i, dt, *scenario.pd_bandwidth_hz);
    tr.q = pd_filter(tr.q, dt, *scenario.pd_bandwidth_hz);
  }
  return tr;
}

}  // namespace ocpr
