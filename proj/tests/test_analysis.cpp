#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "ocpr/analysis.hpp"
#include "oracles.hpp"

using namespace ocpr;
using oracle::lead_lag_oracle;
using oracle::scan_closed_loop_bw;
using std::numbers::pi;

TEST_CASE("detector gain from photocurrent") {
  CHECK(k_pd_from_physics({1.0, 1.0, 0, 0, 0}) == doctest::Approx(0.90032).epsilon(1e-5));
  const double i0kv = 2.55e-2 * pi / (2.0 * std::sqrt(2.0));
  CHECK(i0kv == doctest::Approx(2.832e-2).epsilon(1e-3));
  CHECK(k_pd_from_physics({i0kv, 1.0, 0, 0, 0}) == doctest::Approx(2.55e-2).epsilon(1e-12));
  CHECK(k_pd_from_physics({2e-3, 7.0, 0, 0, 0}) == doctest::Approx(2.0 * k_pd_from_physics({1e-3, 7.0, 0, 0, 0})));
  const auto phys = DetectorPhysics::from_fields(0.1, 2.0, 0.8, 50.0);
  CHECK(phys.i0 == doctest::Approx(4.0 * 0.1 * 2.0 * 0.8));
}

TEST_CASE("open-loop response of the reference loop") {
  const LoopParams p;
  CHECK(open_loop_response(p, 0.0).real() == doctest::Approx(960.84).epsilon(1e-12));
  CHECK(std::abs(open_loop_response(p, 0.0).imag()) == 0.0);
  CHECK(std::abs(open_loop_response(p, 1e12)) < 1e-3);
  CHECK(std::abs(open_loop_response(p, 1e9)) * 10.0 ==
        doctest::Approx(std::abs(open_loop_response(p, 1e8))).epsilon(0.01));
  CHECK(std::sqrt(960.84 * 6e3 * 2e3) == doctest::Approx(107e3).epsilon(0.01));
  CHECK(std::abs(open_loop_response(p, 107e3)) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("open-loop response is conjugate symmetric") {
  const LoopParams p;
  for (double f : {1.0, 1e3, 1e5, 3e6}) {
    const auto pos = open_loop_response(p, f);
    const auto neg = open_loop_response(p, -f);
    CHECK(neg.real() == doctest::Approx(pos.real()));
    CHECK(neg.imag() == doctest::Approx(-pos.imag()));
  }
}

TEST_CASE("closed-loop limits") {
  const auto loop = to_rational(LoopParams{});
  CHECK(std::abs(closed_loop_response(loop, 1e-3)) == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(std::abs(closed_loop_response(loop, 1e10)) == doctest::Approx(loop.magnitude(1e10)).epsilon(1e-3));
  const auto s = error_response(loop, 1e3) + closed_loop_response(loop, 1e3);
  CHECK(s.real() == doctest::Approx(1.0));
  CHECK(s.imag() == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("bode metrics of the literal reference loop match the analytic oracle") {
  const LoopParams p;
  const auto m = bode_metrics(p);
  REQUIRE(m.has_value());
  const auto o = lead_lag_oracle(p.dc_gain(), p.f_lf_z, p.f_lf_p, p.f_ps);
  CHECK(m->crossover_hz == doctest::Approx(o.crossover_hz).epsilon(1e-4));
  CHECK(m->phase_margin_deg == doctest::Approx(o.phase_margin_deg).epsilon(1e-4));
  CHECK(m->crossover_hz == doctest::Approx(107e3).epsilon(0.02));
  CHECK(m->phase_margin_deg > 10.0);
  CHECK(m->phase_margin_deg < 13.0);
  CHECK(m->dc_gain == doctest::Approx(960.84));
  REQUIRE(m->closed_loop_bw_hz.has_value());
  CHECK(*m->closed_loop_bw_hz == doctest::Approx(scan_closed_loop_bw(p)).epsilon(1e-3));
}

TEST_CASE("first-order loop metrics") {
  const RationalLoop loop{100.0, {}, {1e3}};
  const auto m = bode_metrics(loop);
  REQUIRE(m.has_value());
  CHECK(m->crossover_hz == doctest::Approx(1e3 * std::sqrt(100.0 * 100.0 - 1.0)).epsilon(1e-5));
  CHECK(m->crossover_hz == doctest::Approx(100e3).epsilon(1e-3));
  CHECK(m->phase_margin_deg == doctest::Approx(90.57).epsilon(1e-3));
  REQUIRE(m->closed_loop_bw_hz.has_value());
  // T = G/(1+G) / (1 + jf/(fp (1+G)))
  CHECK(*m->closed_loop_bw_hz == doctest::Approx(1e3 * 101.0).epsilon(1e-4));
}

TEST_CASE("loop without a unity-gain crossing is degenerate") {
  CHECK_FALSE(bode_metrics(RationalLoop{0.5, {}, {1e3}}).has_value());
}

TEST_CASE("static phase error") {
  const LoopParams p;
  const auto e = static_phase_error(pi / 4.0, p);
  CHECK(e.error_rad == doctest::Approx(0.8168e-3).epsilon(1e-3));
  CHECK(e.linear_region);
  CHECK(static_phase_error(0.0, p).error_rad == 0.0);
  LoopParams doubled = p;
  doubled.k_pd *= 2.0;
  doubled.k_lf *= 2.0;
  doubled.k_driver *= 2.0;
  doubled.k_ps *= 2.0;
  // four doubled gains multiply H(0) by 16
  CHECK(static_phase_error(pi / 4.0, doubled).error_rad ==
        doctest::Approx(e.error_rad / 16.0).epsilon(0.01));
  LoopParams one = p;
  one.k_lf *= 2.0;
  CHECK(static_phase_error(pi / 4.0, one).error_rad == doctest::Approx(e.error_rad / 2.0).epsilon(0.01));
  const auto wide = static_phase_error(1.0, p);
  CHECK_FALSE(wide.linear_region);
  CHECK(wide.error_rad == doctest::Approx(1.0 / 961.84));
}

TEST_CASE("bode sweep grid") {
  const auto rows = bode_sweep(to_rational(LoopParams{}), 1.0, 1e8, 200.0);
  CHECK(rows.size() == 1601);
  CHECK(rows.front().f_hz == doctest::Approx(1.0));
  CHECK(rows.back().f_hz == doctest::Approx(1e8));
  CHECK(rows.front().mag_db == doctest::Approx(20.0 * std::log10(960.84)).epsilon(1e-5));
  const LoopParams q{};
  for (const auto& r : rows) {
    const double want = (std::atan(r.f_hz / q.f_lf_z) - std::atan(r.f_hz / q.f_lf_p) - std::atan(r.f_hz / q.f_ps)) *
                        180.0 / pi;
    CHECK(r.phase_deg == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("phase is unwrapped past -180 degrees") {
  const RationalLoop loop{1e4, {}, {1.0, 10.0, 100.0}};
  CHECK(loop.phase_deg(1e6) == doctest::Approx(-270.0).epsilon(1e-3));
  CHECK(loop.phase_deg(1e6) < -180.0);
}

TEST_CASE("bandwidth scaling hits the target") {
  for (double target : {1e5, 1e6, 1e7, 1e8}) {
    const auto scaled = scale_loop_bandwidth(LoopParams{}, target);
    const auto m = bode_metrics(scaled);
    REQUIRE(m.has_value());
    REQUIRE(m->closed_loop_bw_hz.has_value());
    CHECK(*m->closed_loop_bw_hz == doctest::Approx(target).epsilon(1e-3));
    CHECK(m->phase_margin_deg == doctest::Approx(bode_metrics(LoopParams{})->phase_margin_deg).epsilon(1e-3));
    CHECK(scaled.dc_gain() == doctest::Approx(LoopParams{}.dc_gain()));
  }
  CHECK_THROWS(scale_loop_bandwidth(LoopParams{}, 0.0));
}
