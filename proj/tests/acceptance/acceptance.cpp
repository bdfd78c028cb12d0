// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rotacalc/circle_map.hpp"
#include "rotacalc/construct.hpp"
#include "rotacalc/fit.hpp"
#include "rotacalc/growth.hpp"
#include "rotacalc/solver.hpp"
#include "rotacalc/verify.hpp"

using namespace rotacalc;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) passed = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "NOT ") + what;
  }
  void absorb(const PropertyResult& r) { require(r.passed, r.name + " [" + r.detail + "]"); }
};

std::string fmt(double x, int digits = 4) { return format_real(x, digits); }

BlaschkeFamily<double> golden_map(double a, std::size_t ones) {
  std::vector<BigInt> q(ones, BigInt(1));
  const auto s = solve_t<double>(a, ContinuedFraction(std::move(q)), 1e-13);
  if (s.verified_digits < 12) throw DomainError("golden solve verified only " + std::to_string(s.verified_digits));
  return BlaschkeFamily<double>(a, s.t);
}

Outcome criterion1() {
  Outcome o;
  o.absorb(check_determinants(200, 30, 50, 101));
  o.absorb(check_ostrowski(200, 1000, 102));
  return o;
}

Outcome criterion2() {
  Outcome o;
  const std::vector<double> as{3.5, 5, 50, 1000};
  o.absorb(check_derivative_fd(as, 1024));
  o.absorb(check_derivative_integral(as));
  o.absorb(check_derivative_extrema(as));
  return o;
}

Outcome criterion3() {
  Outcome o;
  o.absorb(check_exact_digits(50, 500, 103));
  o.absorb(check_solve_roundtrip(6.0, 10, 8, 1e-20, 104));
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto map = golden_map(6.0, 24);
  const auto s = growth_sequence(map, 2000, {.grid = 4096});
  std::vector<double> lx, ly;
  for (const auto& e : s.entries) {
    lx.push_back(std::log(static_cast<double>(e.n)));
    ly.push_back(std::log(e.gamma));
  }
  const LineFit fit = fit_line(lx, ly);
  o.require(fit.slope < 0.05, "log-log slope " + fmt(fit.slope) + " < 0.05");
  double worst = 0;
  for (std::uint64_t lo = 1; lo <= 1024; lo *= 2) {
    double mx = 0, mn = INFINITY;
    for (std::uint64_t n = lo; n < 2 * lo && n <= 2000; ++n) {
      mx = std::max(mx, s.at(n).gamma);
      mn = std::min(mn, s.at(n).gamma);
    }
    worst = std::max(worst, mx / mn);
  }
  o.require(worst < 3, "dyadic max/min " + fmt(worst) + " < 3");
  return o;
}

Outcome criterion5() {
  Outcome o;
  const auto map = golden_map(6.0, 24);
  std::vector<BigInt> ones(12, BigInt(1));
  const auto rep = denjoy_profile(map, ContinuedFraction(std::move(ones)), 12, {.grid = 2048});
  bool decreasing = true;
  std::string seq;
  for (std::size_t n = 4; n <= 10; ++n) {
    seq += (seq.empty() ? "" : " ") + fmt(rep.entries[n].e_n, 3);
    if (n > 4 && !(rep.entries[n].e_n < rep.entries[n - 1].e_n)) decreasing = false;
  }
  o.require(decreasing, "E_4..E_10 decreasing (" + seq + ")");
  o.require(rep.lambda <= 0.9, "lambda " + fmt(rep.lambda) + " <= 0.9");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto w = tangency_point<double>(5.0, Rational(0), 1e-13, PlateauSide::left);
  const auto probe = parabolic_growth_probe(BlaschkeFamily<double>(5.0, w.t_star), w.x0, 1, 8, 64);
  o.require(probe.fit.slope >= 1.6 && probe.fit.slope <= 2.2, "tangency slope " + fmt(probe.fit.slope) + " in [1.6, 2.2]");
  const auto control = parabolic_growth_probe(BlaschkeFamily<double>(5.0, 0.0), 0.5, 1, 8, 64);
  o.require(control.fit.slope > 3, "interior control slope " + fmt(control.fit.slope) + " > 3");
  return o;
}

Outcome criterion7() {
  Outcome o;
  o.absorb(check_farey_counting(100, 3, 10, 105));
  return o;
}

Outcome criterion8() {
  Outcome o;
  o.absorb(check_orbit_deviation(6.0, 20, 106));
  return o;
}

Outcome criterion9() {
  Outcome o;
  o.absorb(check_growth_lemma(500, 107));
  return o;
}

Outcome criterion10() {
  Outcome o;
  ConstructionOptions opt;  // q_budget 1e5, grid 1024
  const auto res = run_construction(1000.0, ThetaSpec::parse("n^1.5"), 1, opt);
  if (res.aborted) {
    o.require(false, "stage built (" + *res.aborted + ")");
    return o;
  }
  const Stage& s = res.state.stages.at(0);
  o.require(s.accepted.passes(), "window ratios < 1 at A_1 = " + std::to_string(s.A) + " (max " +
                                      fmt(s.accepted.max_ratio) + ", n_1 = " + std::to_string(s.n) + ")");
  o.require(!s.open_ended, "stage closed by a violation below the caps");
  const double lower = res.report.lower_factor;
  if (res.report.witness_ratio) {
    o.require(*res.report.witness_ratio >= lower - 0.05,
              "witness ratio " + fmt(*res.report.witness_ratio) + " >= " + fmt(lower) + " - 0.05");
  } else {
    o.require(false, "witness j_1 measured (lower factor " + fmt(lower) + ")");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* title;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "exact arithmetic: determinants and Ostrowski reconstruction", 5, criterion1},
      {2, "derivative closed form, integral and extrema", 5, criterion2},
      {3, "digit extraction on exact rotations and solve_t round trips", 300, criterion3},
      {4, "bounded growth for the golden-target map", 600, criterion4},
      {5, "E_n decay for the golden-target map", 600, criterion5},
      {6, "parabolic growth at a plateau endpoint", 300, criterion6},
      {7, "Farey counting and brute-force enumeration", 30, criterion7},
      {8, "orbit deviation in Farey windows", 120, criterion8},
      {9, "growth-lemma classifier against the literal inequality", 30, criterion9},
      {10, "one-stage construction at a = 1000, theta_n = n^1.5", 1800, criterion10},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::stoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("completed without exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.limit_seconds, "runtime " + fmt(secs, 3) + " s < " + fmt(c.limit_seconds, 4) + " s");
    if (!o.passed) ++failures;
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " -- " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
