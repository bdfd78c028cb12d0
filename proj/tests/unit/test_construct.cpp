#include <cmath>

#include "doctest.h"
#include "rotacalc/construct.hpp"

using namespace rotacalc;

namespace {

ConstructionOptions cheap() {
  ConstructionOptions o;
  o.grid = 128;
  o.q_budget = 1000;
  o.c0_range = 200;
  o.report_range = 400;
  o.safety = 1;
  return o;
}

}  // namespace

TEST_CASE("theta parsing and validation") {
  const auto t = ThetaSpec::parse("n^1.5");
  CHECK(t(4) == doctest::Approx(8.0));
  CHECK(ThetaSpec::parse("2*n^1.5")(9) == doctest::Approx(54.0));
  CHECK(ThetaSpec::parse("n*log(n+2)")(1) == doctest::Approx(std::log(3.0)));
  CHECK(ThetaSpec::parse("log(n)^2")(10) == doctest::Approx(std::pow(std::log(10.0), 2)));
  const auto tab = ThetaSpec::parse("table:1,2,4");
  CHECK(tab(3) == 4);
  CHECK_THROWS_AS(tab(4), DomainError);
  CHECK(ThetaSpec::parse(tab.text()).tabulate(3) == std::vector<double>{0, 1, 2, 4});

  CHECK_NOTHROW(t.validate(10000));
  CHECK_NOTHROW(ThetaSpec::parse("n*log(n+2)").validate(10000));
  CHECK_THROWS_AS(ThetaSpec::parse("n^2.5").validate(1000), DomainError);
  CHECK_THROWS_AS(ThetaSpec::parse("table:1,3,2").validate(3), DomainError);
  CHECK_THROWS_AS(ThetaSpec::parse("n^-1").validate(10), DomainError);
  CHECK_THROWS_AS(ThetaSpec::parse("sqrt(n)"), UsageError);
}

TEST_CASE("choose_next_n follows the threshold rule") {
  const auto opt = cheap();
  const auto theta = ThetaSpec::parse("n^1.5");
  // Fibonacci q_{n-1}: 1, 1, 2, 3, 5, 8, 13, 21. safety * C0 = 20 needs q >= 7.37.
  CHECK(choose_next_n({}, theta, 20, opt) == 6);
  CHECK(choose_next_n({}, ThetaSpec::parse("2*n^1.5"), 20, opt) <= 6);
  for (double c0 : {1.5, 4.0, 30.0, 200.0}) {
    CHECK(choose_next_n({}, ThetaSpec::parse("2*n^1.5"), c0, opt) <= choose_next_n({}, theta, c0, opt));
  }
  QuotientPattern p;
  p.append(4, 7);
  auto spaced = opt;
  spaced.spacing = 6;
  CHECK(choose_next_n(p, theta, 1, spaced) == 10);
  CHECK(choose_next_n(p, theta, 1, opt) == 6);
  CHECK_THROWS_AS(choose_next_n({}, theta, 1e9, opt), DomainError);
}

TEST_CASE("huge theta with a small cap is open-ended") {
  auto opt = cheap();
  opt.a_cap = 3;
  const auto stage = select_A(6.0, {}, 2, ThetaSpec::parse("1e6*n"), 1.7, opt);
  CHECK(stage.open_ended);
  CHECK(stage.A == 3);
  CHECK_FALSE(stage.witness);
  CHECK(stage.accepted.passes());
}

TEST_CASE("window max is nondecreasing in A") {
  const auto opt = cheap();
  const auto theta = ThetaSpec::parse("1e6*n");
  double prev = 0;
  for (std::uint64_t A : {4, 8, 16, 32}) {
    const auto e = evaluate_candidate(6.0, {}, 2, A, theta, opt);
    CHECK(e.norm >= prev * (1 - 1e-9));
    prev = e.norm;
  }
}

TEST_CASE("one stage: window and witness properties") {
  const auto opt = cheap();
  const auto theta = ThetaSpec::parse("2*n");
  const auto result = run_construction(6.0, theta, 1, opt);
  REQUIRE_FALSE(result.aborted);
  REQUIRE(result.state.stages.size() == 1);
  const Stage& s = result.state.stages[0];
  CHECK(s.n % 2 == 0);
  CHECK(s.A >= 1);
  CHECK_FALSE(s.open_ended);
  CHECK(s.accepted.passes());
  CHECK(s.accepted.A == s.A);
  REQUIRE(s.witness);
  CHECK(s.witness->A == s.A + 1);
  CHECK(s.witness->max_ratio >= 1);
  const auto q = s.window_q.convert_to<std::int64_t>();
  const auto j = std::llabs(s.witness->argmax_j);
  CHECK(j >= q);
  CHECK(j <= static_cast<std::int64_t>(s.A + 1) * q);
  for (const auto& e : s.trail) CHECK(e.passes() == (e.A <= s.A));

  const RatioReport& r = result.report;
  CHECK(r.rows.size() == opt.report_range);
  CHECK(r.lower_factor > 0);
  CHECK(r.lower_factor <= 1);
  REQUIRE(r.witness_ratio);
  CHECK(std::isfinite(*r.witness_ratio));
  REQUIRE(r.orbit_deviation);
  CHECK(*r.orbit_deviation >= 0);
  for (const auto& row : r.upper) CHECK(row.r <= s.A * static_cast<std::uint64_t>(q));
}

TEST_CASE("zero stages is the bounded-type baseline") {
  auto opt = cheap();
  const auto result = run_construction(6.0, ThetaSpec::parse("n^1.5"), 0, opt);
  CHECK(result.state.stages.empty());
  CHECK(result.report.rows.size() == opt.report_range);
  double gmax = 0;
  for (const auto& row : result.report.rows) gmax = std::max(gmax, row.gamma);
  CHECK(gmax <= result.state.c0 * (1 + 1e-9));
  CHECK(gmax > 1.5);
}

TEST_CASE("serialization round trip and resume equivalence") {
  const auto opt = cheap();
  const auto theta = ThetaSpec::parse("2*n");
  const auto one = run_construction(6.0, theta, 1, opt);
  const std::string text = serialize(one.state);
  const auto back = deserialize(text);
  CHECK(serialize(back) == text);
  CHECK(back.pattern == one.state.pattern);

  const auto two = run_construction(6.0, theta, 2, opt);
  const auto resumed = resume_construction(back, 1);
  CHECK(serialize(resumed.state) == serialize(two.state));
  CHECK(resumed.aborted == two.aborted);
  CHECK(resumed.report.max_ratio == two.report.max_ratio);
  CHECK(two.report.perturbation.size() == two.state.stages.size() - 1);
  for (double d : two.report.perturbation) CHECK(std::isfinite(d));

  CHECK_THROWS_AS(deserialize("version = 9\n"), UsageError);
  CHECK_THROWS_AS(deserialize(text + "\n[stage]\nbogus = 1\n"), UsageError);
}
