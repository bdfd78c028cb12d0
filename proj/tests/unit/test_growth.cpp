#include <random>

#include "doctest.h"
#include "rotacalc/growth.hpp"
#include "rotacalc/parallel.hpp"

using namespace rotacalc;

TEST_CASE("gamma_1 matches the derivative extrema") {
  for (double a : {3.5, 5.0, 50.0}) {
    auto s = growth_sequence(BlaschkeFamily<double>(a, 0.3), 1, {.grid = 1024});
    const double expected = std::max((a + 3) / (a + 1), (a - 1) / (a - 3));
    CHECK(s.at(1).gamma == doctest::Approx(expected).epsilon(1e-12));
    CHECK(s.at(1).forward == doctest::Approx((a + 3) / (a + 1)).epsilon(1e-12));
    CHECK(s.at(1).backward == doctest::Approx((a - 1) / (a - 3)).epsilon(1e-12));
    CHECK(s.at(1).upper >= s.at(1).gamma);
  }
}

TEST_CASE("near-rotation and hyperbolic growth") {
  auto rigid = growth_sequence(BlaschkeFamily<double>(1e4, 0.3), 10, {.grid = 256});
  for (const auto& e : rigid.entries) CHECK(e.gamma < 1 + 20.0 * static_cast<double>(e.n) / 1e4);

  // t = 0, a = 5: repelling fixed point at 0 with Df = 4/3, attracting at 1/2
  // with Df = 1/2, so log Gamma_n grows like n log 2.
  auto s = growth_sequence(BlaschkeFamily<double>(5.0, 0.0), 60, {.grid = 512});
  const double rate = (std::log(s.at(60).gamma) - std::log(s.at(30).gamma)) / 30;
  CHECK(rate == doctest::Approx(std::log(2.0)).epsilon(1e-3));
}

TEST_CASE("submultiplicativity and backward consistency") {
  BlaschkeFamily<double> f(6.0, 0.41);
  auto s = growth_sequence(f, 40, {.grid = 1024});
  for (std::uint64_t m = 1; m <= 20; ++m) {
    for (std::uint64_t n = 1; n + m <= 40; n += 3) {
      CHECK(s.at(m + n).gamma <= s.at(m).upper * s.at(n).upper * (1 + 1e-9));
      CHECK(s.at(m + n).gamma >= 1);
    }
  }
  for (std::uint64_t n : {1, 7, 25, 40}) {
    const auto& e = s.at(n);
    auto back = iterate(f, e.argmax_backward, -static_cast<std::int64_t>(n));
    CHECK(std::exp(back.log_deriv.back()) == doctest::Approx(e.backward).epsilon(1e-8));
    auto fwd = iterate(f, e.argmax_forward, static_cast<std::int64_t>(n));
    CHECK(std::exp(fwd.log_deriv.back()) == doctest::Approx(e.forward).epsilon(1e-10));
  }
  // The worker count does not change the result.
  set_worker_count(3);
  auto parallel = growth_sequence(f, 40, {.grid = 1024});
  set_worker_count(1);
  for (std::uint64_t n = 1; n <= 40; ++n) CHECK(parallel.at(n).gamma == s.at(n).gamma);
}

TEST_CASE("growth budget truncates") {
  auto s = growth_sequence(BlaschkeFamily<double>(6.0, 0.1), 100, {.grid = 64, .refine_steps = 0, .budget = 64 * 30});
  CHECK(s.truncated);
  CHECK(s.last() == 30);
  CHECK_THROWS_AS(growth_sequence(BlaschkeFamily<double>(6.0, 0.1), 10, {.grid = 100}), DomainError);
}

TEST_CASE("denjoy profile at q_1") {
  const double a = 6;
  BlaschkeFamily<double> f(a, 0.38);
  auto report = denjoy_profile(f, ContinuedFraction{1, 1, 1}, 1, {.grid = 1024, .cross_check_digits = false});
  REQUIRE(report.entries.size() == 2);
  CHECK(report.entries[1].q == 1);
  const double expected = std::log(std::max((a + 3) / (a + 1), (a - 1) / (a - 3)));
  CHECK(report.entries[1].sup_log == doctest::Approx(expected).epsilon(1e-12));
  CHECK(report.entries[0].sup_scaled_dlog == 0);
  for (const auto& e : report.entries) CHECK(e.e_n >= e.sup_log);
}

namespace {

// Literal re-evaluation of the hypothesis in long double.
std::optional<std::size_t> oracle_violation(const std::vector<double>& A, double C) {
  for (std::size_t k = 1; k + 1 < A.size(); ++k) {
    const long double lhs = 2.0L * A[k] - A[k - 1] - A[k + 1];
    const long double rhs = C * std::exp(-static_cast<long double>(A[k]));
    const long double slack = 1e-14L * (std::abs(A[k - 1]) + 2 * std::abs(A[k]) + std::abs(A[k + 1]) + rhs);
    if (lhs - rhs > slack) return k;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("growth lemma classifier") {
  std::vector<double> zero(50, 0.0);
  CHECK(growth_lemma_check(zero, 1.0).verdict == LemmaVerdict::log_bounded);

  std::vector<double> linear(10001);
  for (std::size_t k = 0; k < linear.size(); ++k) linear[k] = 0.01 * static_cast<double>(k);
  auto lin = growth_lemma_check(linear, 100.0);
  CHECK(lin.verdict == LemmaVerdict::linear_growth);
  CHECK(lin.slope_confirmed);
  CHECK(lin.tail_slope == doctest::Approx(0.01));

  // The bound sequence itself sits on the boundary of the continuous problem;
  // its discrete second difference exceeds C exp(-A) by a factor
  // -log(1 - u)/u, u = s^2/(ks+1)^2, so the literal hypothesis fails at k = 1.
  const double C = 2;
  std::vector<double> edge(200);
  for (std::size_t k = 0; k < edge.size(); ++k) edge[k] = 2 * std::log(static_cast<double>(k) * std::sqrt(C / 2) + 1);
  auto e = growth_lemma_check(edge, C);
  CHECK(e.log_bound_holds);
  CHECK(e.first_violation == oracle_violation(edge, C));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> A(3 + static_cast<std::size_t>(unit(rng) * 300), 0.0);
    const double c = 0.1 + 5 * unit(rng);
    const double drift = unit(rng) * 0.2;
    for (std::size_t k = 1; k < A.size(); ++k) A[k] = A[k - 1] + drift / std::sqrt(static_cast<double>(k)) + 0.01 * unit(rng);
    auto got = growth_lemma_check(A, c);
    CHECK(got.first_violation == oracle_violation(A, c));
    CHECK((got.verdict == LemmaVerdict::hypothesis_violated) == oracle_violation(A, c).has_value());
  }
  CHECK_THROWS_AS(growth_lemma_check({1.0, 2.0, 3.0}, 1.0), DomainError);
}

TEST_CASE("product-bound monitor negative control") {
  GrowthSeries quadratic;
  for (std::uint64_t l = 1; l <= 400; ++l) {
    GrowthEntry e;
    e.n = l;
    e.gamma = e.forward = e.upper = static_cast<double>(l * l);
    quadratic.entries.push_back(e);
  }
  DenjoyReport none;
  auto rec = theorem1_monitor(quadratic, none, ConvergentTable(ContinuedFraction{1, 1, 1}));
  CHECK_FALSE(rec.vanishing);
  CHECK(rec.ratio.back() == doctest::Approx(1.0));

  GrowthSeries bounded = quadratic;
  for (auto& e : bounded.entries) e.gamma = e.forward = 1.5;
  CHECK(theorem1_monitor(bounded, none, ConvergentTable(ContinuedFraction{1, 1, 1})).vanishing);
}

TEST_CASE("orbit deviation sums") {
  BlaschkeFamily<double> f(6.0, 0.3), g(6.0, 0.3001);
  CHECK(orbit_deviation_sum(f, f, 0.2, 1000) == 0);
  double previous = 0;
  for (std::uint64_t n : {1, 5, 20, 100}) {
    const double s = orbit_deviation_sum(f, g, 0.2, n);
    CHECK(s >= previous);
    previous = s;
  }
  CHECK_THROWS_AS(orbit_deviation_sum(f, BlaschkeFamily<double>(7.0, 0.3), 0.2, 5), DomainError);
}
