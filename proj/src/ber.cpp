#include "ocpr/ber.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "ocpr/channel.hpp"
#include "ocpr/quadrature.hpp"
#include "ocpr/rng.hpp"

namespace ocpr {

namespace {

constexpr std::size_t kBaseOrder = 201;
constexpr std::size_t kMaxOrder = 201 * 16;
constexpr std::uint64_t kChunk = 1ULL << 18;

// P(x + n outside [lo, hi]) for n ~ N(0, n0/2); lo/hi absent on the outer levels.
double axis_error(double mean, int level, std::span<const double> thresholds, double sqrt_n0) {
  double p = 0.0;
  if (level > 0) p += 0.5 * std::erfc((mean - thresholds[level - 1]) / sqrt_n0);
  if (level < static_cast<int>(thresholds.size())) p += 0.5 * std::erfc((thresholds[level] - mean) / sqrt_n0);
  return p;
}

struct AxisPair {
  double p_i;
  double p_q;
};

AxisPair axis_errors(const OffsetQamConstellation& c, std::size_t idx, double theta, double sqrt_n0) {
  const IqPoint p = c.point(idx);
  const IqPoint r = rotate_symbol(p.i - c.a0(), p.q - c.a0(), c.a0(), theta);
  const auto th = c.thresholds();
  if (sqrt_n0 == 0.0) {
    // Noiseless: deterministic decision.
    return {c.decide_level(r.i) != c.i_level_of(idx) ? 1.0 : 0.0,
            c.decide_level(r.q) != c.q_level_of(idx) ? 1.0 : 0.0};
  }
  return {axis_error(r.i, c.i_level_of(idx), th, sqrt_n0), axis_error(r.q, c.q_level_of(idx), th, sqrt_n0)};
}

double combine(double pi, double pq) { return pi + pq - pi * pq; }

double ser_at_order(const OffsetQamConstellation& c, const NoiseEnvironment& env, std::size_t order) {
  const double sigma = env.sigma_pn;
  const double half = sigma < 0.3 ? std::min(std::numbers::pi, 8.0 * sigma) : std::numbers::pi;
  const auto& rule = gauss_legendre(order);
  const double sqrt_n0 = std::sqrt(env.n0);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);

  std::vector<double> theta(order), weight(order);
  for (std::size_t k = 0; k < order; ++k) {
    theta[k] = half * rule.nodes[k];
    weight[k] = half * rule.weights[k] * norm * std::exp(-theta[k] * theta[k] / (2.0 * sigma * sigma));
  }
  double total = 0.0;
  for (std::size_t s = 0; s < static_cast<std::size_t>(c.order()); ++s) {
    double pi = 0.0;
    double pq = 0.0;
    for (std::size_t k = 0; k < order; ++k) {
      const auto e = axis_errors(c, s, theta[k], sqrt_n0);
      pi += weight[k] * e.p_i;
      pq += weight[k] * e.p_q;
    }
    total += combine(pi, pq);
  }
  return total / static_cast<double>(c.order());
}

struct ChunkCounts {
  std::uint64_t symbol_errors = 0;
  std::uint64_t bit_errors = 0;
};

ChunkCounts run_chunk(const OffsetQamConstellation& c, const NoiseEnvironment& env, std::uint64_t count,
                      std::uint64_t seed, std::uint64_t chunk) {
  Rng rng(seed, chunk);
  const double awgn = std::sqrt(env.n0 / 2.0);
  const auto mask = static_cast<std::uint64_t>(c.order() - 1);
  const double a0 = c.a0();
  const auto words = c.words();
  ChunkCounts counts;
  for (std::uint64_t n = 0; n < count; ++n) {
    const auto idx = static_cast<std::size_t>(rng.bits() & mask);
    const IqPoint p = c.point(idx);
    IqPoint r{p.i, p.q};
    if (env.sigma_pn > 0.0) r = rotate_symbol(p.i - a0, p.q - a0, a0, env.sigma_pn * rng.normal());
    if (awgn > 0.0) {
      r.i += awgn * rng.normal();
      r.q += awgn * rng.normal();
    }
    const std::size_t got = c.demap_index(r.i, r.q);
    if (got != idx) {
      ++counts.symbol_errors;
      counts.bit_errors += static_cast<std::uint64_t>(std::popcount(words[got] ^ words[idx]));
    }
  }
  return counts;
}

}  // namespace

ConditionalError conditional_symbol_error(const OffsetQamConstellation& c, std::size_t symbol_index,
                                          double theta, const NoiseEnvironment& env) {
  if (symbol_index >= static_cast<std::size_t>(c.order())) {
    throw std::out_of_range("conditional_symbol_error: symbol index out of range");
  }
  const auto e = axis_errors(c, symbol_index, theta, std::sqrt(env.n0));
  return {e.p_i, e.p_q, combine(e.p_i, e.p_q)};
}

SerResult semi_analytic_ser(const OffsetQamConstellation& c, const NoiseEnvironment& env) {
  if (!(env.n0 >= 0.0) || !(env.sigma_pn >= 0.0)) {
    throw std::invalid_argument("semi_analytic_ser: n0 and sigma must be >= 0");
  }
  SerResult r;
  r.sigma_out_of_range = env.sigma_pn >= 1.0;
  if (env.sigma_pn == 0.0) {
    double total = 0.0;
    for (std::size_t s = 0; s < static_cast<std::size_t>(c.order()); ++s) {
      total += conditional_symbol_error(c, s, 0.0, env).p_symbol;
    }
    r.ser = total / static_cast<double>(c.order());
    return r;
  }
  std::size_t order = kBaseOrder;
  double prev = ser_at_order(c, env, order);
  for (;;) {
    const std::size_t next = 2 * order;
    const double cur = ser_at_order(c, env, next);
    const bool ok = std::abs(cur - prev) <= 0.01 * std::abs(cur);
    order = next;
    prev = cur;
    if (ok || order >= kMaxOrder) {
      r.converged = ok;
      break;
    }
  }
  r.ser = prev;
  r.quadrature_order = order;
  return r;
}

double ber_from_ser(double ser, int order) {
  if (!(ser >= 0.0 && ser <= 1.0)) throw std::invalid_argument("ber_from_ser: ser must be in [0, 1]");
  if (order < 2) throw std::invalid_argument("ber_from_ser: order must be >= 2");
  return ser / std::log2(static_cast<double>(order));
}

double wilson_halfwidth(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return 0.0;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  return z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

MonteCarloResult monte_carlo_ber(const OffsetQamConstellation& c, const NoiseEnvironment& env,
                                 std::uint64_t num_symbols, std::uint64_t seed, unsigned threads) {
  if (num_symbols < 10000) throw std::invalid_argument("monte_carlo_ber: need at least 1e4 symbols");
  if (!(env.n0 >= 0.0) || !(env.sigma_pn >= 0.0)) {
    throw std::invalid_argument("monte_carlo_ber: n0 and sigma must be >= 0");
  }
  const std::uint64_t chunks = (num_symbols + kChunk - 1) / kChunk;
  std::vector<ChunkCounts> results(chunks);
  auto work = [&](std::uint64_t first, std::uint64_t step) {
    for (std::uint64_t k = first; k < chunks; k += step) {
      const std::uint64_t count = std::min(kChunk, num_symbols - k * kChunk);
      results[k] = run_chunk(c, env, count, seed, k);
    }
  };
  unsigned n_threads = threads ? threads : std::max(1U, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::uint64_t>(n_threads, chunks));
  if (n_threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
  }

  MonteCarloResult r;
  r.symbols = num_symbols;
  for (const auto& cc : results) {
    r.symbol_errors += cc.symbol_errors;
    r.bit_errors += cc.bit_errors;
  }
  const std::uint64_t bits = num_symbols * static_cast<std::uint64_t>(c.bits_per_symbol());
  r.ser = static_cast<double>(r.symbol_errors) / static_cast<double>(num_symbols);
  r.ber = static_cast<double>(r.bit_errors) / static_cast<double>(bits);
  r.ser_halfwidth = wilson_halfwidth(r.symbol_errors, num_symbols);
  r.ber_halfwidth = wilson_halfwidth(r.bit_errors, bits);
  return r;
}

std::optional<double> fec_threshold(const std::vector<double>& snr_db, const std::vector<double>& ber,
                                    double threshold) {
  for (std::size_t k = 0; k + 1 < snr_db.size(); ++k) {
    if (ber[k] >= threshold && ber[k + 1] < threshold) {
      if (ber[k + 1] <= 0.0) return snr_db[k + 1];
      const double l0 = std::log10(ber[k]);
      const double l1 = std::log10(ber[k + 1]);
      const double lt = std::log10(threshold);
      return snr_db[k] + (lt - l0) / (l1 - l0) * (snr_db[k + 1] - snr_db[k]);
    }
  }
  return std::nullopt;
}

SweepResult snr_sweep(const OffsetQamConstellation& c, double sigma_pn, const std::vector<double>& snr_grid_db,
                      const SweepMetadata& meta) {
  if (snr_grid_db.empty()) throw std::invalid_argument("snr_sweep: empty SNR grid");
  for (std::size_t k = 1; k < snr_grid_db.size(); ++k) {
    if (!(snr_grid_db[k] > snr_grid_db[k - 1])) throw std::invalid_argument("snr_sweep: grid must be strictly increasing");
  }
  SweepResult out;
  out.order = c.order();
  out.m_ratio = c.m_ratio();
  out.sigma_pn = sigma_pn;
  out.meta = meta;
  out.snr_db = snr_grid_db;
  const double es = average_symbol_energy(c);
  for (double snr : snr_grid_db) {
    const NoiseEnvironment env{es / std::pow(10.0, snr / 10.0), sigma_pn};
    const auto r = semi_analytic_ser(c, env);
    out.converged = out.converged && r.converged;
    out.ser.push_back(r.ser);
    out.ber.push_back(ber_from_ser(std::min(1.0, r.ser), c.order()));
  }
  out.fec_threshold_snr_db = fec_threshold(out.snr_db, out.ber);
  return out;
}

double penalty(const SweepResult& a, const SweepResult& b) {
  if (!a.fec_threshold_snr_db || !b.fec_threshold_snr_db) {
    throw std::invalid_argument("penalty: both sweeps must reach the FEC threshold inside their grids");
  }
  return *a.fec_threshold_snr_db - *b.fec_threshold_snr_db;
}

std::vector<double> snr_grid(double start_db, double stop_db, double step_db) {
  if (!(step_db > 0.0) || !(stop_db >= start_db)) throw std::invalid_argument("snr_grid: need step > 0, stop >= start");
  std::vector<double> g;
  const auto n = static_cast<std::size_t>(std::floor((stop_db - start_db) / step_db + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) g.push_back(start_db + static_cast<double>(k) * step_db);
  return g;
}

}  // namespace ocpr
