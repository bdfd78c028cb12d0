#include <random>

#include "doctest.h"
#include "rotacalc/circle_map.hpp"

using namespace rotacalc;

TEST_CASE("lift normalisation and degree one") {
  BlaschkeFamily<double> f(5.0, 0.3);
  CHECK(f.lift(0.0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(BlaschkeFamily<double>(7.0, 0.0).lift(0.0) == 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int i = 0; i < 200; ++i) {
    const double x = unit(rng), y = unit(rng);
    CHECK(f.lift(x + 1) == doctest::Approx(f.lift(x) + 1).epsilon(1e-14));
    if (x < y) CHECK(f.lift(x) < f.lift(y));
    // t enters additively.
    BlaschkeFamily<double> g(5.0, 0.0);
    CHECK(f.lift(x) - g.lift(x) == doctest::Approx(0.3).epsilon(1e-14));
  }
  CHECK_THROWS_AS(BlaschkeFamily<double>(3.0, 0.0), DomainError);
}

TEST_CASE("near-rotation at large a") {
  BlaschkeFamily<double> f(1000.0, 0.25);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x = i / 1000.0;
    worst = std::max(worst, std::abs(f.lift(x) - x - 0.25));
  }
  CHECK(worst < 1e-3);
  CHECK(worst == doctest::Approx(std::asin(1e-3) / 3.14159265358979323846).epsilon(1e-4));
}

TEST_CASE("derivative closed form") {
  for (double a : {3.5, 5.0, 50.0, 1000.0}) {
    BlaschkeFamily<double> f(a, 0.0);
    CHECK(f.derivative(0.0) == doctest::Approx((a + 3) / (a + 1)).epsilon(1e-14));
    CHECK(f.derivative(0.5) == doctest::Approx((a - 3) / (a - 1)).epsilon(1e-14));
    const double step = 1e-5;
    for (int i = 0; i < 1024; ++i) {
      const double x = (i + 0.5) / 1024.0;
      const double fd = (f.lift(x + step) - f.lift(x - step)) / (2 * step);
      CHECK(std::abs(fd - f.derivative(x)) <= 1e-6 * f.derivative(x));
    }
    double integral = 0;
    for (int i = 0; i < 4096; ++i) integral += f.derivative(i / 4096.0);
    CHECK(std::abs(integral / 4096.0 - 1) < 1e-9);
  }
}

TEST_CASE("log-derivative of Df") {
  BlaschkeFamily<double> f(6.0, 0.0);
  const double step = 1e-6;
  for (int i = 0; i < 64; ++i) {
    const double x = (i + 0.25) / 64.0;
    const double fd = (std::log(f.derivative(x + step)) - std::log(f.derivative(x - step))) / (2 * step);
    CHECK(f.dlog_derivative(x) == doctest::Approx(fd).epsilon(1e-6));
  }
  // Maximum of |D log Df| against the closed form at the tangency point of 0/1.
  const double a = 5.0;
  const double x0 = std::acos(-1 / a) / (2 * 3.14159265358979323846);
  CHECK(BlaschkeFamily<double>(a, 0.0).dlog_derivative(x0) ==
        doctest::Approx(-4 * 3.14159265358979323846 / std::sqrt(a * a - 1)));
  CHECK(dlog_derivative_sup(1000.0) == doctest::Approx(4 * 3.14159265358979323846 / 1000).epsilon(2e-3));
}

TEST_CASE("streamed orbit agrees with direct iteration") {
  set_working_digits(60);
  BlaschkeFamily<Extended> f(Extended(6), Extended("0.61"));
  Extended x = Extended("0.123");
  LiftOrbit<Extended> orbit(f, x, {.track_slope = true, .track_real_derivative = true});
  Extended direct = x;
  Extended product = 1;
  for (int i = 0; i < 1000; ++i) {
    product *= f.derivative(direct);
    direct = f.lift(direct);
    orbit.step();
  }
  CHECK(abs(orbit.position() - direct) < Extended("1e-50"));
  CHECK(abs(orbit.real_derivative() / product - 1) < Extended("1e-50"));
  CHECK(orbit.log_derivative() == doctest::Approx(to_double(log(product))).epsilon(1e-10));

  // Slope against a finite difference of log Df^n.
  BlaschkeFamily<double> g(6.0, 0.61);
  auto log_df = [&](double y) {
    LiftOrbit<double> o(g, y);
    o.advance(50);
    return o.log_derivative();
  };
  LiftOrbit<double> o(g, 0.3, {.track_slope = true});
  o.advance(50);
  CHECK(o.slope() == doctest::Approx((log_df(0.3 + 1e-6) - log_df(0.3 - 1e-6)) / 2e-6).epsilon(1e-5));
}

TEST_CASE("chain rule and inverse round trip") {
  BlaschkeFamily<double> f(5.0, 0.37);
  auto forward = iterate(f, 0.2, 1500);
  for (int m : {0, 10, 400, 1000}) {
    for (int n : {1, 77, 500}) {
      auto tail = iterate(f, forward.lifted[static_cast<std::size_t>(m)], n);
      const double lhs = forward.log_deriv[static_cast<std::size_t>(m + n)];
      const double rhs = forward.log_deriv[static_cast<std::size_t>(m)] + tail.log_deriv.back();
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
  set_working_digits(60);
  // Far from any wide plateau, so the backward orbit is not repelled.
  BlaschkeFamily<Extended> g(Extended(1000), Extended("0.37"));
  const Extended x0("0.2");
  auto there = iterate(g, x0, 10000);
  auto back = iterate(g, there.lifted.back(), -10000);
  CHECK(abs(back.lifted.back() - x0) < Extended("1e-45"));
  CHECK(back.log_deriv.back() == doctest::Approx(-there.log_deriv.back()).epsilon(1e-9));
  CHECK(iterate(g, x0, 0).points.size() == 1);
}
