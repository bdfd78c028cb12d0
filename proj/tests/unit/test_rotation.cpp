#include <random>

#include "doctest.h"
#include "rotacalc/rotation.hpp"

using namespace rotacalc;

TEST_CASE("birkhoff averages") {
  BlaschkeFamily<double> fixed(5.0, 0.0);
  auto zero = rotation_birkhoff(fixed, 100);
  CHECK(zero.point == 0.0);
  BlaschkeFamily<double> f(1000.0, 0.25);
  auto e = rotation_birkhoff(f, 10000);
  CHECK(std::abs(e.point - 0.25) < 1e-3);
  CHECK(e.error_bound == doctest::Approx(1e-4));
  CHECK(rotation_birkhoff(f, 20000).error_bound == doctest::Approx(e.error_bound / 2));
  CHECK(e.left < e.right);
}

TEST_CASE("compare_to_rational examples") {
  BlaschkeFamily<double> fixed(5.0, 0.0);
  auto r0 = compare_to_rational(fixed, Rational(0));
  CHECK(r0.ordering == Ordering::locked);
  CHECK(r0.certified);
  BlaschkeFamily<double> f(1000.0, 0.25);
  CHECK(compare_to_rational(f, Rational(1, 5)).ordering == Ordering::above);
  CHECK(compare_to_rational(f, Rational(1, 3)).ordering == Ordering::below);
  // rho(-t) = -rho(t) by the odd symmetry of the lift, so rho(1/2) = 1/2.
  CHECK(compare_to_rational(BlaschkeFamily<double>(1000.0, 0.5), Rational(1, 2)).ordering == Ordering::locked);
}

TEST_CASE("compare_to_rational agrees with Birkhoff brackets") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ua(3.2, 50), ut(0, 1);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    BlaschkeFamily<double> f(ua(rng), ut(rng));
    auto est = rotation_birkhoff(f, 4000);
    for (const Rational& pq : {Rational(1, 3), Rational(1, 2), Rational(2, 3), Rational(3, 7)}) {
      if (pq < est.left) {
        CHECK(compare_to_rational(f, pq).ordering == Ordering::above);
        ++checked;
      } else if (est.right < pq) {
        CHECK(compare_to_rational(f, pq).ordering == Ordering::below);
        ++checked;
      }
    }
  }
  CHECK(checked > 200);
}

TEST_CASE("extended precision refines tangencies") {
  set_working_digits(60);
  // Just outside the 0/1 plateau: g = lift(x) - x has max of order 1e-30.
  const Extended a = 5;
  const Extended x0 = acos(Extended(-1) / a) / (2 * pi_value<Extended>());
  BlaschkeFamily<Extended> f0(a, Extended(0));
  const Extended t_minus = -(f0.lift(x0) - x0);
  BlaschkeFamily<Extended> below(a, t_minus - Extended("1e-30"));
  BlaschkeFamily<Extended> inside(a, t_minus + Extended("1e-30"));
  CHECK(compare_to_rational(below, Rational(0)).ordering == Ordering::below);
  CHECK(compare_to_rational(inside, Rational(0)).ordering == Ordering::locked);
}

TEST_CASE("digits of exact rotations") {
  ExactRotation five_eighths(Rational(5, 8));
  auto r = extract_digits(five_eighths, 10);
  CHECK(r.cf.to_string() == "1,1,1,2");
  CHECK(r.status == DigitStatus::rational);

  std::mt19937_64 rng(9);
  std::uniform_int_distribution<long long> den(2, 500);
  for (int trial = 0; trial < 50; ++trial) {
    const long long q = den(rng);
    std::uniform_int_distribution<long long> num(1, q - 1);
    const Rational rho(num(rng), q);
    ExactRotation oracle(rho);
    auto got = extract_digits(oracle, 64);
    CHECK(got.status == DigitStatus::rational);
    CHECK(got.cf.quotients() == cf_expand(rho, 64).cf.quotients());
  }
}

TEST_CASE("digits of quadratic irrationals") {
  set_working_digits(60);
  for (int d : {2, 3, 5, 6, 7, 8, 10, 11, 12, 13, 14, 15, 17, 18, 19, 20, 21, 22, 23, 24}) {
    const Extended root = sqrt(Extended(d));
    const Extended rho = root - floor(root);
    RealRotation oracle(rho, Extended("1e-50"));
    auto got = extract_digits(oracle, 12);
    CHECK(got.status == DigitStatus::complete);
    CHECK(got.cf.quotients() == cf_expand(rho, 12).cf.quotients());
  }
}

TEST_CASE("digits of the map") {
  // rho in (1/5, 1/4] has first digit 4.
  BlaschkeFamily<double> f(1000.0, 0.2499);
  auto digits = extract_digits(f, 3);
  const auto est = rotation_birkhoff(f, 100000);
  CHECK(est.point > 0.2);
  CHECK(est.point < 0.25);
  REQUIRE(digits.cf.size() >= 1);
  CHECK(digits.cf.quotient(1) == 4);

  BlaschkeFamily<double> locked(1000.0, 0.5);
  auto half = extract_digits(locked, 5);
  CHECK(half.status == DigitStatus::rational);
  CHECK(half.cf == ContinuedFraction{2});
}
