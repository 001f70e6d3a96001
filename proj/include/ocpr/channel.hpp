#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ocpr/constellation.hpp"

namespace ocpr {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kDefaultRefractiveIndex = 1.468;

struct LaserModel {
  double linewidth_hz = 0.0;            // Lorentzian FWHM
  double center_frequency_rad_s = 0.0;  // cancels in the homodyne beat
  double initial_phase_rad = 0.0;
};

// LO/Rx path length mismatch and the resulting differential delay n*dL/c.
class PathMismatch {
 public:
  PathMismatch() = default;
  PathMismatch(double delta_l_m, double refractive_index = kDefaultRefractiveIndex);

  double delta_l() const { return delta_l_; }
  double refractive_index() const { return refractive_index_; }
  double tau() const { return refractive_index_ * delta_l_ / kSpeedOfLight; }

 private:
  double delta_l_ = 0.0;
  double refractive_index_ = kDefaultRefractiveIndex;
};

struct PhaseNoisePath {
  double dt = 0.0;
  std::vector<double> samples;
  std::uint64_t seed = 0;
};

struct BeatPhase {
  double dt = 0.0;
  std::vector<double> samples;
};

// Wiener phase: increments i.i.d. N(0, 2*pi*linewidth*dt), starting at the
// laser's initial phase. Throws on dt <= 0 or count == 0.
PhaseNoisePath generate_phase_noise(const LaserModel& laser, double dt, std::size_t count,
                                    std::uint64_t seed);

// Delay in whole samples used for a differential delay tau at step dt.
// Requires dt <= tau/4 unless tau is an integer multiple of dt (or tau == 0).
std::size_t delay_samples(double tau, double dt);

// samples[k] = phi_offset + path[k] - path[k - D], D = delay_samples(tau, dt);
// indices before the start of the path use path[0].
BeatPhase beat_phase(const PhaseNoisePath& path, const PathMismatch& mismatch, double phi_offset);

// Phase rotation of an offset-QAM symbol (centered coordinates i, q).
IqPoint rotate_symbol(double i, double q, double a0, double delta_phi);

// Adds N(0, n0/2) to every value.
std::vector<double> add_awgn(std::span<const double> values, double n0, std::uint64_t seed);

// Causal single-pole photodetector response with unity DC gain.
std::vector<double> pd_filter(std::span<const double> trace, double dt, double bandwidth_hz);

struct ChannelScenario {
  double baud_rate_hz = 100e9;
  LaserModel laser;
  PathMismatch mismatch;
  double phase_offset_rad = 0.0;          // static LO/Rx phase offset
  std::optional<double> n0;               // AWGN PSD; absent = noiseless
  std::optional<double> pd_bandwidth_hz;  // absent = ideal photodetector
  int samples_per_symbol = 2;
  std::uint64_t seed = 1;
};

enum class DataPattern {
  Iid,       // independent uniform symbols
  Balanced,  // each block of `order` symbols is a random permutation of the constellation
};

// Streaming symbol source over constellation indices.
class SymbolSource {
 public:
  SymbolSource(const OffsetQamConstellation& c, DataPattern pattern, std::uint64_t seed,
               std::uint64_t stream = 0);
  std::size_t next();

 private:
  std::size_t order_;
  DataPattern pattern_;
  std::vector<std::size_t> block_;
  std::size_t pos_;
  std::uint64_t engine_state_;
  std::uint64_t next_bits();
};

struct Trace {
  double dt = 0.0;
  std::vector<double> time_s;
  std::vector<double> i;
  std::vector<double> q;
};

// Received I/Q waveform (NRZ, samples_per_symbol samples per symbol) with the
// scenario's static offset, beat phase noise, AWGN and photodetector filter.
Trace simulate_trace(const ChannelScenario& scenario, const OffsetQamConstellation& c,
                     std::size_t num_symbols, DataPattern pattern = DataPattern::Iid);

}  // namespace ocpr
