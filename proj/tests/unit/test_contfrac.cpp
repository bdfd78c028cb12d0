#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "rotacalc/contfrac.hpp"
#include "rotacalc/errors.hpp"

using namespace rotacalc;

namespace {

// Value of [a_1..a_n] by the nested definition, independent of the library.
Rational nested_value(const std::vector<long long>& a) {
  Rational x(0);
  for (auto it = a.rbegin(); it != a.rend(); ++it) x = (Rational(*it) + x).reciprocal();
  return x;
}

std::vector<Rational> brute_force_rationals(const Rational& lo, const Rational& hi, long long max_den) {
  std::set<std::pair<long long, long long>> seen;
  std::vector<Rational> out;
  for (long long q = 1; q < max_den; ++q) {
    const long long p_min = (lo * Rational(q)).floor().convert_to<long long>();
    const long long p_max = (hi * Rational(q)).floor().convert_to<long long>() + 1;
    for (long long p = p_min; p <= p_max; ++p) {
      if (std::gcd(p, q) != 1) continue;
      Rational r(p, q);
      if (lo < r && r < hi) out.push_back(r);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("rational normalisation and parsing") {
  CHECK(Rational(6, -4) == Rational(-3, 2));
  CHECK(Rational::parse("0.7") == Rational(7, 10));
  CHECK(Rational::parse("3/9") == Rational(1, 3));
  CHECK(Rational::parse("-1.25e-3") == Rational(-1, 800));
  CHECK(Rational(-7, 2).floor() == -4);
  CHECK_THROWS_AS(Rational::parse("1/0"), UsageError);
  CHECK_THROWS_AS(Rational::parse("abc"), UsageError);
  CHECK(Rational(1, 3).to_double() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("cf_expand on exact rationals") {
  CHECK(cf_expand(Rational(1, 2), 10).cf.to_string() == "2");
  auto seven_tenths = cf_expand(Rational(7, 10), 10);
  CHECK(seven_tenths.cf.to_string() == "1,2,3");
  CHECK(seven_tenths.status == CfStatus::exact);
  CHECK(nested_value({1, 2, 3}) == Rational(7, 10));
  auto cut = cf_expand(Rational(7, 10), 2);
  CHECK(cut.status == CfStatus::term_limit);
  CHECK(cut.cf.to_string() == "1,2");
  CHECK_THROWS_AS(cf_expand(Rational(0), 5), DomainError);
  CHECK_THROWS_AS(cf_expand(Rational(-1, 3), 5), DomainError);
}

TEST_CASE("cf_expand of a real certifies only shared digits") {
  set_working_digits(60);
  const Extended golden = (boost::multiprecision::sqrt(Extended(5)) - 1) / 2;
  auto expansion = cf_expand(golden, 10);
  CHECK(expansion.status == CfStatus::term_limit);
  CHECK(expansion.cf.to_string() == "1,1,1,1,1,1,1,1,1,1");

  // A double carries about 16 digits, so the golden expansion stops near
  // q_n ~ 1e8 and is flagged instead of guessed.
  auto short_run = cf_expand((std::sqrt(5.0) - 1) / 2, 200);
  CHECK(short_run.status == CfStatus::precision_exhausted);
  CHECK(short_run.cf.size() > 30);
  CHECK(short_run.cf.size() < 45);
  for (const auto& a : short_run.cf.quotients()) CHECK(a == 1);
}

TEST_CASE("canonical forms compare equal") {
  CHECK(ContinuedFraction{1, 2, 3} == ContinuedFraction{1, 2, 2, 1});
  CHECK(ContinuedFraction{1} == ContinuedFraction{1});
  CHECK(ContinuedFraction{1, 2, 2, 1}.canonical().to_string() == "1,2,3");
  CHECK(ContinuedFraction{1, 2, 2, 1}.value() == Rational(7, 10));
  CHECK(ContinuedFraction::parse("1,1,7,1").to_string() == "1,1,7,1");
  CHECK(ContinuedFraction::parse("1,1,7,1").slice(2, 3).to_string() == "1,7");
  CHECK_THROWS_AS(ContinuedFraction::parse("1,0,2"), UsageError);
}

TEST_CASE("convergent tables") {
  ConvergentTable golden(ContinuedFraction{1, 1, 1, 1, 1});
  std::vector<int> fib = {1, 1, 2, 3, 5, 8};
  for (std::size_t n = 0; n <= 5; ++n) CHECK(golden.q(n) == fib[n]);
  ConvergentTable t(ContinuedFraction{1, 2, 3});
  CHECK(t.convergent(3) == Rational(7, 10));
  CHECK(abs(t.p(2) * t.q(3) - t.p(3) * t.q(2)) == 1);
  CHECK(ConvergentTable(ContinuedFraction{2}).convergent(1) == Rational(1, 2));
  CHECK_THROWS_AS(ConvergentTable(ContinuedFraction{}), DomainError);
}

TEST_CASE("random round trips, determinant and alternation") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(1, 30), quot(1, 50);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<long long> a(static_cast<std::size_t>(len(rng)));
    for (auto& x : a) x = quot(rng);
    ContinuedFraction cf(std::vector<BigInt>(a.begin(), a.end()));
    ConvergentTable table(cf);
    CHECK(table.convergent(table.depth()) == nested_value(a));
    for (std::size_t n = 0; n + 1 <= table.depth(); ++n) {
      CHECK(abs(table.p(n) * table.q(n + 1) - table.p(n + 1) * table.q(n)) == 1);
    }
    const Rational value = cf.value();
    for (std::size_t n = 0; n < table.depth(); ++n) {
      if (n % 2 == 0) CHECK(table.convergent(n) < value);
      else CHECK(table.convergent(n) >= value);
    }
    if (cf.value() < Rational(1)) CHECK(cf_expand(value, 100).cf == cf);
  }
}

TEST_CASE("ostrowski digits") {
  ConvergentTable golden(ContinuedFraction{1, 1, 1, 1, 1, 1});  // q = 1,1,2,3,5,8,13
  auto seven = ostrowski_decompose(7, golden);
  CHECK(seven.top == 4);
  CHECK(seven.digits[4] == 1);
  CHECK(seven.digits[3] == 0);
  CHECK(seven.digits[2] == 1);
  CHECK(seven.digits[1] == 0);
  CHECK(seven.digits[0] == 0);
  auto eight = ostrowski_decompose(8, golden);
  CHECK(eight.top == 5);
  CHECK(eight.digits[5] == 1);
  for (std::size_t i = 0; i < 5; ++i) CHECK(eight.digits[i] == 0);
  CHECK_THROWS_AS(ostrowski_decompose(13, golden), DomainError);
  CHECK_THROWS_AS(ostrowski_decompose(0, golden), DomainError);

  std::mt19937_64 rng(11);
  ConvergentTable t(ContinuedFraction{3, 1, 4, 1, 5, 9, 2, 6});
  std::uniform_int_distribution<long long> pick(1, t.q(t.depth()).convert_to<long long>() - 1);
  for (int i = 0; i < 1000; ++i) {
    const BigInt l = pick(rng);
    auto d = ostrowski_decompose(l, t);
    BigInt sum = 0;
    for (std::size_t k = 0; k <= d.top; ++k) {
      sum += d.digits[k] * t.q(k);
      CHECK(d.digits[k] <= (k + 1 <= t.depth() ? t.a(k + 1) : BigInt(0)));
      CHECK(d.remainders[k] < t.q(k));
    }
    CHECK(sum == l);
  }
}

TEST_CASE("farey predicates and enumeration") {
  CHECK(is_farey(Rational(1, 3), Rational(1, 2)));
  CHECK(mediant(Rational(1, 3), Rational(1, 2)) == Rational(2, 5));
  CHECK_FALSE(is_farey(Rational(1, 3), Rational(2, 3)));
  CHECK_THROWS_AS(FareyInterval(Rational(1, 3), Rational(2, 3)), DomainError);

  auto inside = enumerate_rationals(Rational(1, 2), Rational(3, 4), 8);
  std::vector<Rational> expected = {Rational(4, 7), Rational(3, 5), Rational(2, 3), Rational(5, 7)};
  CHECK(inside == expected);
  CHECK(enumerate_rationals(Rational(0), Rational(1), 3) == std::vector<Rational>{Rational(1, 2)});
  CHECK_THROWS_AS(enumerate_rationals(Rational(1, 2), Rational(1, 2), 5), DomainError);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long long> den(1, 40), num(-60, 60), md(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    Rational x(num(rng), den(rng)), y(num(rng), den(rng));
    if (x == y) continue;
    if (y < x) std::swap(x, y);
    const long long m = md(rng);
    CHECK(enumerate_rationals(x, y, m) == brute_force_rationals(x, y, m));
  }
}

TEST_CASE("quotient patterns") {
  QuotientPattern pattern({{4, 7}});
  CHECK(pattern_expand(pattern, 6).to_string() == "1,1,1,7,1,1");
  CHECK(pattern_expand(QuotientPattern(), 5).to_string() == "1,1,1,1,1");
  CHECK(pattern_expand(pattern, 6, TerminalOverride{6, 3}).to_string() == "1,1,1,7,1,3");
  CHECK_THROWS_AS(pattern_expand(pattern, 6, TerminalOverride{4, 3}), DomainError);
  CHECK_THROWS_AS(pattern_expand(pattern, 6, TerminalOverride{5, 3}), DomainError);
  CHECK_THROWS_AS(QuotientPattern({{3, 2}}), DomainError);
  CHECK_THROWS_AS(QuotientPattern({{4, 2}, {4, 3}}), DomainError);
}
