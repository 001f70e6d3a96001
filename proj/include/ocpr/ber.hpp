#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ocpr/constellation.hpp"

namespace ocpr {

inline constexpr double kKp4BerThreshold = 2.4e-4;

struct NoiseEnvironment {
  double n0 = 0.0;        // AWGN PSD; per-dimension variance n0/2
  double sigma_pn = 0.0;  // residual phase noise std dev, rad
};

struct ConditionalError {
  double p_i = 0.0;
  double p_q = 0.0;
  double p_symbol = 0.0;  // p_i + p_q - p_i p_q
};

// Error probabilities of one transmitted symbol rotated by theta, from the
// per-axis decision region boundaries under AWGN only.
ConditionalError conditional_symbol_error(const OffsetQamConstellation& c, std::size_t symbol_index,
                                          double theta, const NoiseEnvironment& env);

struct SerResult {
  double ser = 0.0;
  std::size_t quadrature_order = 0;  // 0 for the sigma = 0 point evaluation
  bool converged = true;             // 1% agreement under order doubling
  bool sigma_out_of_range = false;   // sigma >= 1 rad
};

// Symbol-wise average of P(e_I) + P(e_Q) - P(e_I) P(e_Q), each axis probability
// integrated over a Gaussian phase error (Gauss-Legendre on [-pi, pi], or on
// +/- 8 sigma when sigma < 0.3).
SerResult semi_analytic_ser(const OffsetQamConstellation& c, const NoiseEnvironment& env);

double ber_from_ser(double ser, int order);

struct MonteCarloResult {
  double ber = 0.0;
  double ser = 0.0;
  double ber_halfwidth = 0.0;  // Wilson 95%
  double ser_halfwidth = 0.0;
  std::uint64_t symbols = 0;
  std::uint64_t symbol_errors = 0;
  std::uint64_t bit_errors = 0;
};

// Per symbol: uniform symbol, theta ~ N(0, sigma^2), rotation, AWGN, demap.
// Work is split into fixed chunks with their own RNG streams, so results do not
// depend on the thread count. Throws if num_symbols < 10^4.
MonteCarloResult monte_carlo_ber(const OffsetQamConstellation& c, const NoiseEnvironment& env,
                                 std::uint64_t num_symbols, std::uint64_t seed, unsigned threads = 0);

double wilson_halfwidth(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

struct SweepMetadata {
  double linewidth_hz = 0.0;
  double delta_l_m = 0.0;
  double loop_bw_hz = 0.0;
};

struct SweepResult {
  std::vector<double> snr_db;  // Es/N0
  std::vector<double> ber;
  std::vector<double> ser;
  int order = 0;
  double m_ratio = 0.0;
  double sigma_pn = 0.0;
  SweepMetadata meta;
  std::optional<double> fec_threshold_snr_db;  // BER = 2.4e-4 crossing, log-linear interpolation
  bool converged = true;
};

// Throws if snr_grid_db is empty or not strictly increasing.
SweepResult snr_sweep(const OffsetQamConstellation& c, double sigma_pn, const std::vector<double>& snr_grid_db,
                      const SweepMetadata& meta = {});

std::optional<double> fec_threshold(const std::vector<double>& snr_db, const std::vector<double>& ber,
                                    double threshold = kKp4BerThreshold);

// threshold(a) - threshold(b), dB. Throws std::invalid_argument if either sweep lacks one.
double penalty(const SweepResult& a, const SweepResult& b);

std::vector<double> snr_grid(double start_db, double stop_db, double step_db);

}  // namespace ocpr
