#include <random>

#include "doctest.h"
#include "rotacalc/growth.hpp"
#include "rotacalc/solver.hpp"

using namespace rotacalc;

namespace {

const double kPi = 3.14159265358979323846;

ContinuedFraction ones(std::size_t n) { return ContinuedFraction(std::vector<BigInt>(n, 1)); }

}  // namespace

TEST_CASE("precision selection by tolerance") {
  CHECK(working_digits_for(1e-10) == 0);
  CHECK(working_digits_for(1e-13) == 0);
  CHECK(working_digits_for(1e-20) == 60);
  CHECK(working_digits_for(1e-50) == 70);
  CHECK_THROWS_AS(working_digits_for(0), DomainError);
  CHECK_THROWS_AS(plateau_endpoints<double>(5.0, Rational(0), 1e-18), DomainError);
}

TEST_CASE("plateau of 0/1") {
  const double a = 5, tol = 1e-13;
  auto pl = plateau_endpoints<double>(a, Rational(0), tol);
  // Tangency at cos 2 pi x0 = -1/a, so t_- = -(lift_0(x0) - x0).
  const double x0 = std::acos(-1 / a) / (2 * kPi);
  const double expected = -(BlaschkeFamily<double>(a, 0.0).lift(x0) - x0);
  CHECK(pl.t_minus == doctest::Approx(expected).epsilon(1e-11));
  CHECK(pl.t_plus == doctest::Approx(-expected).epsilon(1e-11));
  CHECK(pl.t_minus < 0);
  CHECK(pl.residual_minus <= tol);
  BlaschkeFamily<double> base(a, 0.0);
  CHECK(compare_to_rational(base.with_t(pl.t_minus - 2 * tol), Rational(0)).ordering == Ordering::below);
  CHECK(compare_to_rational(base.with_t(pl.t_minus + 2 * tol), Rational(0)).ordering == Ordering::locked);
  CHECK(compare_to_rational(base.with_t(pl.t_plus + 2 * tol), Rational(0)).ordering == Ordering::above);
}

TEST_CASE("plateau widths and nesting") {
  auto half = plateau_endpoints<double>(1000.0, Rational(1, 2), 1e-13);
  CHECK(half.t_minus <= 0.5);
  CHECK(half.t_plus >= 0.5);
  CHECK(half.t_plus - half.t_minus < 1e-5);
  CHECK(half.t_plus - half.t_minus > 0);

  const Rational fractions[] = {Rational(1, 3), Rational(2, 5), Rational(1, 2), Rational(3, 5), Rational(2, 3)};
  double previous = -1;
  for (const Rational& pq : fractions) {
    auto pl = plateau_endpoints<double>(6.0, pq, 1e-12);
    CHECK(pl.t_minus <= pl.t_plus);
    CHECK(pl.t_minus > previous);
    previous = pl.t_plus;
  }
}

TEST_CASE("tangency witness") {
  const double a = 5;
  auto w = tangency_point<double>(a, Rational(0), 1e-13);
  CHECK(w.x0 == doctest::Approx(std::acos(-1 / a) / (2 * kPi)).epsilon(1e-7));
  CHECK(std::abs(w.g_value) < 1e-12);
  CHECK(std::abs(w.derivative_minus_one) < 1e-6);
  CHECK_FALSE(w.flat);
  CHECK(w.second_deriv_proxy == doctest::Approx(w.second_derivative).epsilon(1e-4));
  // Touching from below: g <= 0 up to the parameter tolerance.
  BlaschkeFamily<double> f(a, w.t_star);
  for (int i = 0; i < 1000; ++i) {
    const double x = i / 1000.0;
    CHECK(f.lift(x) - x <= 1e-12);
  }

  auto right = tangency_point<double>(6.0, Rational(1, 2), 1e-13, PlateauSide::right);
  BlaschkeFamily<double> g(6.0, right.t_star);
  LiftOrbit<double> orbit(g, right.x0);
  orbit.advance(2);
  CHECK(std::abs(orbit.displacement() - 1) < 1e-10);
  CHECK(std::abs(std::exp(orbit.log_derivative()) - 1) < 1e-5);
  CHECK(right.second_deriv_proxy > 0);  // a minimum of g
}

TEST_CASE("parabolic probe") {
  auto w = tangency_point<double>(5.0, Rational(0), 1e-13);
  auto probe = parabolic_growth_probe(BlaschkeFamily<double>(5.0, w.t_star), w.x0, 1, 8, 64);
  CHECK(probe.truncated == 0);
  CHECK(probe.fit.slope >= 1.6);
  CHECK(probe.fit.slope <= 2.2);
  const auto& rows = probe.rows;
  for (std::size_t i = 0; 2 * rows[i].l <= 64; ++i) {
    const double ratio = rows[2 * rows[i].l - 8].sup / rows[i].sup;
    CHECK(ratio >= 2);
    CHECK(ratio <= 8);
  }
  // Hyperbolic control: interior of the plateau, attracting point at 1/2.
  auto control = parabolic_growth_probe(BlaschkeFamily<double>(5.0, 0.0), 0.5, 1, 8, 64);
  CHECK(control.fit.slope > 3);

  std::vector<double> theta(100);
  for (std::size_t n = 0; n < theta.size(); ++n) theta[n] = 0.01 * static_cast<double>(n * n);
  auto with_theta = parabolic_growth_probe(BlaschkeFamily<double>(5.0, w.t_star), w.x0, 1, 8, 16, theta);
  REQUIRE(with_theta.exceeds_theta.has_value());
  CHECK(*with_theta.exceeds_theta);
}

TEST_CASE("solve_t examples") {
  auto golden = solve_t<double>(6.0, ones(10), 1e-13);
  CHECK(golden.verified_digits == 10);
  CHECK(golden.bracket_width <= 1e-13);

  auto four = solve_t<double>(1000.0, ContinuedFraction{4, 2, 1}, 1e-13);
  const auto est = rotation_birkhoff(BlaschkeFamily<double>(1000.0, four.t), 100000);
  CHECK(est.point > 0.2);
  CHECK(est.point < 0.25);
  CHECK(four.verified_digits == 3);
}

TEST_CASE("solve_t round trip and monotonicity") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> digit(1, 3);
  std::vector<std::pair<Rational, double>> solved;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<BigInt> q(8);
    for (auto& d : q) d = digit(rng);
    ContinuedFraction target(q);
    auto r = solve_t<double>(6.0, target, 1e-13);
    CHECK(r.verified_digits == 8);
    solved.emplace_back(target.value(), r.t);
  }
  for (std::size_t i = 0; i < solved.size(); ++i) {
    for (std::size_t j = 0; j < solved.size(); ++j) {
      if (solved[i].first < solved[j].first) CHECK(solved[i].second <= solved[j].second);
    }
  }
}

TEST_CASE("solve_t in extended precision") {
  set_working_digits(60);
  auto r = solve_t<Extended>(Extended(6), ContinuedFraction{1, 2, 1, 1, 3, 1, 1, 2}, 1e-20);
  CHECK(r.verified_digits == 8);
  CHECK(r.bracket_width <= 1e-20);
  CHECK(r.t_lo < r.t_hi);
}

TEST_CASE("denjoy quantities for the golden map") {
  auto r = solve_t<double>(6.0, ones(22), 1e-13);
  BlaschkeFamily<double> f(6.0, r.t);
  auto report = denjoy_profile(f, ones(22), 12);
  CHECK(report.digits_consistent);
  const ConvergentTable table(ones(22));
  for (const auto& e : report.entries) CHECK(e.q == table.q(e.n));
  for (std::size_t n = 3; n < 10; ++n) CHECK(report.entries[n + 1].e_n < report.entries[n].e_n);
  CHECK(report.lambda < 0.9);
  CHECK(report.lambda == doctest::Approx(0.618).epsilon(0.05));

  auto series = growth_sequence(f, 300, {.grid = 1024});
  auto monitor = theorem1_monitor(series, report, table);
  CHECK(monitor.vanishing);
  CHECK(monitor.c_fit > 0);
  for (const auto& row : monitor.bounds) CHECK(row.measured <= row.bound * (1 + 1e-12));
  REQUIRE(monitor.pair_half_from.has_value());
  CHECK(*monitor.pair_half_from < monitor.pair_factor.size());
}
