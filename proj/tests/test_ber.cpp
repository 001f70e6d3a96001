#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "ocpr/ber.hpp"
#include "ocpr/constellation.hpp"
#include "ocpr/quadrature.hpp"
#include "ocpr/rng.hpp"
#include "oracles.hpp"

using namespace ocpr;
using oracle::h_erfc;
using oracle::qam16_s1_i;
using oracle::qam16_s1_q;
using oracle::qam4_s1_i;
using oracle::qam4_s1_q;
using oracle::textbook_16qam_ser;
using std::numbers::pi;

namespace {

double n0_for(const OffsetQamConstellation& c, double snr_db) {
  return average_symbol_energy(c) / std::pow(10.0, snr_db / 10.0);
}

}  // namespace

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
  for (std::size_t n : {1u, 2u, 5u, 201u, 402u}) {
    const auto& r = gauss_legendre(n);
    REQUIRE(r.nodes.size() == n);
    double w = 0.0;
    for (double x : r.weights) w += x;
    CHECK(w == doctest::Approx(2.0).epsilon(1e-13));
    const std::size_t deg = std::min<std::size_t>(2 * n - 1, 20);
    for (std::size_t d = 0; d <= deg; d += 1) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += r.weights[k] * std::pow(r.nodes[k], static_cast<double>(d));
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1.0);
      CHECK(s == doctest::Approx(exact).epsilon(1e-12).scale(1.0));
    }
  }
  CHECK_THROWS(gauss_legendre(0));
}

TEST_CASE("4-QAM with no phase error: per-axis error is independent of the offset") {
  for (double m : {0.0, 0.1, 0.3}) {
    const auto c = build_constellation(4, 1.0, m);
    const NoiseEnvironment env{0.05, 0.0};
    const auto e = conditional_symbol_error(c, 2, 0.0, env);
    const double p = h_erfc(1.0 / (2.0 * std::sqrt(env.n0)));
    CHECK(e.p_i == doctest::Approx(p).epsilon(1e-13));
    CHECK(e.p_q == doctest::Approx(p).epsilon(1e-13));
    CHECK(e.p_symbol == doctest::Approx(2.0 * p - p * p).epsilon(1e-13));
  }
}

TEST_CASE("generic engine reproduces the 4-QAM closed form") {
  const auto c = build_constellation(4, 1.0, 0.1);
  const NoiseEnvironment env{0.04, 0.0};
  const double k = 1.0 / std::sqrt(env.n0);
  for (double t : {-0.3, -0.1, 0.1, 0.3}) {
    const auto e = conditional_symbol_error(c, 2, t, env);
    CHECK(e.p_i == doctest::Approx(qam4_s1_i(k, 0.1, t)).epsilon(1e-12));
    CHECK(e.p_q == doctest::Approx(qam4_s1_q(k, 0.1, t)).epsilon(1e-12));
  }
}

TEST_CASE("generic engine reproduces the 16-QAM closed form") {
  const auto c = build_constellation(16, 1.0, 0.1);
  const NoiseEnvironment env{0.01, 0.0};
  const double k = 1.0 / std::sqrt(env.n0);
  for (double t : {-0.3, -0.1, 0.0, 0.1, 0.3}) {
    const auto e = conditional_symbol_error(c, 4, t, env);
    CHECK(e.p_i == doctest::Approx(qam16_s1_i(k, 0.1, t)).epsilon(1e-12));
    CHECK(e.p_q == doctest::Approx(qam16_s1_q(k, 0.1, t)).epsilon(1e-12));
  }
}

TEST_CASE("closed-form equivalence over random triples") {
  Rng rng(2024);
  for (int n = 0; n < 100; ++n) {
    const double t = 0.8 * (2.0 * rng.uniform() - 1.0);
    const double m = 0.3 * rng.uniform();
    const double k = 2.0 + 8.0 * rng.uniform();
    const NoiseEnvironment env{1.0 / (k * k), 0.0};
    const auto c4 = build_constellation(4, 1.0, m);
    const auto c16 = build_constellation(16, 1.0, m);
    const auto e4 = conditional_symbol_error(c4, 2, t, env);
    const auto e16 = conditional_symbol_error(c16, 4, t, env);
    CHECK(e4.p_i == doctest::Approx(qam4_s1_i(k, m, t)).epsilon(1e-10));
    CHECK(e4.p_q == doctest::Approx(qam4_s1_q(k, m, t)).epsilon(1e-10));
    CHECK(e16.p_i == doctest::Approx(qam16_s1_i(k, m, t)).epsilon(1e-10));
    CHECK(e16.p_q == doctest::Approx(qam16_s1_q(k, m, t)).epsilon(1e-10));
  }
}

TEST_CASE("conditional error rejects a bad symbol index") {
  const auto c = build_constellation(4, 1.0, 0.1);
  CHECK_THROWS_AS(conditional_symbol_error(c, 4, 0.0, {0.1, 0.0}), std::out_of_range);
}

TEST_CASE("diagonal reflection symmetry") {
  for (int order : {4, 16, 64}) {
    const auto c = build_constellation(order, 1.0, 0.15);
    const int r = c.side();
    const NoiseEnvironment env{0.01, 0.0};
    for (double t : {-0.2, 0.05, 0.4}) {
      for (int li = 0; li < r; ++li) {
        for (int lq = 0; lq < r; ++lq) {
          const auto a = conditional_symbol_error(c, li * r + lq, t, env);
          const auto b = conditional_symbol_error(c, lq * r + li, -t, env);
          CHECK(a.p_symbol == doctest::Approx(b.p_symbol).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("QPSK limit at 10 dB") {
  const auto c = build_constellation(4, 1.0, 0.0);
  const double n0 = n0_for(c, 10.0);
  const auto r = semi_analytic_ser(c, {n0, 0.0});
  const double ber = ber_from_ser(r.ser, 4);
  const double qpsk = h_erfc(std::sqrt(5.0));
  CHECK(qpsk == doctest::Approx(7.83e-4).epsilon(1e-3));
  CHECK(std::abs(ber - qpsk) < 1e-6);
  CHECK(r.quadrature_order == 0);
}

TEST_CASE("SER under the axis-independence model equals 2p - p^2 for 4-QAM at every SNR") {
  const auto c = build_constellation(4, 1.0, 0.0);
  for (double snr = 4.0; snr <= 14.0; snr += 0.5) {
    const double n0 = n0_for(c, snr);
    const double p = h_erfc(std::sqrt(std::pow(10.0, snr / 10.0) / 2.0));
    const auto r = semi_analytic_ser(c, {n0, 0.0});
    CHECK(r.ser == doctest::Approx(2.0 * p - p * p).epsilon(1e-12));
  }
}

TEST_CASE("16-QAM without offset matches the textbook SER") {
  const auto c = build_constellation(16, 1.0, 0.0);
  for (double snr = 4.0; snr <= 24.0; snr += 1.0) {
    const auto r = semi_analytic_ser(c, {n0_for(c, snr), 0.0});
    CHECK(std::abs(r.ser - textbook_16qam_ser(std::pow(10.0, snr / 10.0))) < 1e-12);
  }
}

TEST_CASE("offset is invisible without phase error") {
  for (int order : {4, 16}) {
    const auto a = build_constellation(order, 1.0, 0.0);
    const auto b = build_constellation(order, 1.0, 0.1);
    for (double snr : {6.0, 12.0, 18.0}) {
      const double n0 = n0_for(a, snr);
      CHECK(semi_analytic_ser(a, {n0, 0.0}).ser == doctest::Approx(semi_analytic_ser(b, {n0, 0.0}).ser).epsilon(1e-12));
    }
  }
}

TEST_CASE("noiseless, phase-error-free SER is zero") {
  const auto c = build_constellation(16, 1.0, 0.1);
  CHECK(semi_analytic_ser(c, {0.0, 0.0}).ser == 0.0);
  const auto mc = monte_carlo_ber(c, {0.0, 0.0}, 100000, 1);
  CHECK(mc.ber == 0.0);
  CHECK(mc.ser == 0.0);
}

TEST_CASE("SER is non-decreasing in sigma") {
  for (int order : {4, 16}) {
    const auto c = build_constellation(order, 1.0, 0.1);
    for (double snr : {8.0, 14.0, 20.0}) {
      const double n0 = n0_for(c, snr);
      double prev = 0.0;
      for (double s : {0.0, 0.01, 0.03, 0.05, 0.1, 0.2, 0.3, 0.5}) {
        const auto r = semi_analytic_ser(c, {n0, s});
        CHECK(r.converged);
        CHECK(r.ser >= prev * (1.0 - 1e-12));
        prev = r.ser;
      }
    }
  }
}

TEST_CASE("quadrature converges and flags large sigma") {
  const auto c = build_constellation(16, 1.0, 0.1);
  const auto r = semi_analytic_ser(c, {n0_for(c, 18.0), 0.05});
  CHECK(r.converged);
  CHECK(r.quadrature_order >= 201);
  CHECK_FALSE(r.sigma_out_of_range);
  CHECK(semi_analytic_ser(c, {n0_for(c, 18.0), 1.2}).sigma_out_of_range);
  CHECK_THROWS(semi_analytic_ser(c, {-1.0, 0.0}));
}

TEST_CASE("small sigma matches a second-order expansion") {
  // E[f(theta)] ~ f(0) + sigma^2 f''(0) / 2 for the per-axis probabilities.
  const auto c = build_constellation(4, 1.0, 0.1);
  const NoiseEnvironment env{0.02, 0.0};
  const double s = 0.002;
  const double h = 1e-3;
  double expected = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    auto pi_at = [&](double t) { return conditional_symbol_error(c, k, t, env).p_i; };
    auto pq_at = [&](double t) { return conditional_symbol_error(c, k, t, env).p_q; };
    const double ei = pi_at(0.0) + 0.5 * s * s * (pi_at(h) - 2.0 * pi_at(0.0) + pi_at(-h)) / (h * h);
    const double eq = pq_at(0.0) + 0.5 * s * s * (pq_at(h) - 2.0 * pq_at(0.0) + pq_at(-h)) / (h * h);
    expected += ei + eq - ei * eq;
  }
  expected /= 4.0;
  CHECK(semi_analytic_ser(c, {env.n0, s}).ser == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("ber_from_ser") {
  CHECK(ber_from_ser(0.01, 4) == doctest::Approx(0.005));
  CHECK(ber_from_ser(0.016, 16) == doctest::Approx(0.004));
  CHECK(ber_from_ser(0.0, 64) == 0.0);
  CHECK_THROWS(ber_from_ser(1.5, 4));
  CHECK_THROWS(ber_from_ser(-0.1, 4));
}

TEST_CASE("Wilson half-width") {
  // z^2 = 3.8415, n = 100, k = 10
  const double z = 1.959963984540054;
  const double n = 100.0, p = 0.1;
  const double expected = z / (1.0 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
  CHECK(wilson_halfwidth(10, 100) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(wilson_halfwidth(0, 1000) > 0.0);
}

TEST_CASE("Monte Carlo QPSK bit errors match the closed form") {
  const auto c = build_constellation(4, 1.0, 0.0);
  const double n0 = n0_for(c, 10.0);
  const std::uint64_t n = 10000000;
  const auto mc = monte_carlo_ber(c, {n0, 0.0}, n, 5);
  const double p = h_erfc(std::sqrt(5.0));
  const double sd = std::sqrt(p * (1.0 - p) / (2.0 * n));
  CHECK(mc.symbols == n);
  CHECK(std::abs(mc.ber - p) < 3.0 * sd);
  CHECK(mc.ber_halfwidth > 0.0);
}

TEST_CASE("Monte Carlo agrees with the semi-analytic SER for 16-QAM with phase noise") {
  const auto c = build_constellation(16, 1.0, 0.1);
  const std::uint64_t n = 2000000;
  for (double snr : {12.0, 14.0, 16.0, 18.0, 20.0}) {
    const NoiseEnvironment env{n0_for(c, snr), 0.05};
    const auto semi = semi_analytic_ser(c, env);
    const auto mc = monte_carlo_ber(c, env, n, 40 + static_cast<std::uint64_t>(snr));
    const double sd = std::sqrt(semi.ser * (1.0 - semi.ser) / n);
    CAPTURE(snr);
    CHECK(std::abs(mc.ser - semi.ser) < 3.0 * sd);
  }
}

TEST_CASE("Monte Carlo is reproducible and thread-count independent") {
  const auto c = build_constellation(16, 1.0, 0.1);
  const NoiseEnvironment env{n0_for(c, 14.0), 0.05};
  const auto a = monte_carlo_ber(c, env, 1000000, 9, 1);
  const auto b = monte_carlo_ber(c, env, 1000000, 9, 3);
  CHECK(a.bit_errors == b.bit_errors);
  CHECK(a.symbol_errors == b.symbol_errors);
  CHECK_THROWS(monte_carlo_ber(c, env, 9999, 1));
}

TEST_CASE("SNR sweep") {
  const auto c = build_constellation(16, 1.0, 0.1);
  const auto grid = snr_grid(4.0, 24.0, 0.25);
  CHECK(grid.size() == 81);
  CHECK(grid.back() == doctest::Approx(24.0));
  const auto sw = snr_sweep(c, 0.0, grid, {1e6, 0.1, 166e3});
  CHECK(sw.order == 16);
  CHECK(sw.m_ratio == doctest::Approx(0.1));
  CHECK(sw.meta.linewidth_hz == 1e6);
  for (std::size_t k = 1; k < grid.size(); ++k) CHECK(sw.ber[k] < sw.ber[k - 1]);
  for (double b : sw.ber) CHECK((b >= 0.0 && b <= 0.5));
  REQUIRE(sw.fec_threshold_snr_db.has_value());
  // log-linear interpolation brackets
  const auto th = *sw.fec_threshold_snr_db;
  std::size_t k = 0;
  while (grid[k + 1] < th) ++k;
  CHECK(sw.ber[k] >= kKp4BerThreshold);
  CHECK(sw.ber[k + 1] <= kKp4BerThreshold);
  const double expect = grid[k] + (std::log(kKp4BerThreshold) - std::log(sw.ber[k])) /
                                      (std::log(sw.ber[k + 1]) - std::log(sw.ber[k])) * (grid[k + 1] - grid[k]);
  CHECK(th == doctest::Approx(expect).epsilon(1e-12));

  CHECK(penalty(sw, sw) == 0.0);
  const auto short_grid = snr_sweep(c, 0.0, snr_grid(4.0, 8.0, 1.0));
  CHECK_FALSE(short_grid.fec_threshold_snr_db.has_value());
  CHECK_THROWS_AS(penalty(sw, short_grid), std::invalid_argument);
  CHECK_THROWS(snr_sweep(c, 0.0, {5.0, 4.0}));
  CHECK_THROWS(snr_sweep(c, 0.0, {}));
}

TEST_CASE("penalty sign follows the sweep order") {
  const auto c = build_constellation(16, 1.0, 0.1);
  const auto grid = snr_grid(10.0, 30.0, 0.25);
  const auto clean = snr_sweep(c, 0.0, grid);
  const auto noisy = snr_sweep(c, 0.05, grid);
  CHECK(penalty(noisy, clean) > 0.0);
  CHECK(penalty(clean, noisy) == doctest::Approx(-penalty(noisy, clean)));
}
