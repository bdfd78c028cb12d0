#include "rotacalc/verify.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "rotacalc/circle_map.hpp"
#include "rotacalc/construct.hpp"
#include "rotacalc/contfrac.hpp"
#include "rotacalc/growth.hpp"
#include "rotacalc/rotation.hpp"
#include "rotacalc/solver.hpp"

namespace rotacalc {

namespace {

using Rng = std::mt19937_64;

template <class Body>
PropertyResult timed(std::string name, Body&& body) {
  PropertyResult r;
  r.name = std::move(name);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void fail(PropertyResult& r, const std::string& detail) {
  if (r.passed) r.detail = detail;
  r.passed = false;
}

long long uniform(Rng& rng, long long lo, long long hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng); }

ContinuedFraction random_cf(Rng& rng, std::size_t len, long long max_quotient) {
  std::vector<BigInt> q(len);
  for (auto& v : q) v = uniform(rng, 1, max_quotient);
  return ContinuedFraction(std::move(q));
}

// Value of [a_1..a_n] by the backward recurrence, independent of the table.
Rational backward_value(const ContinuedFraction& cf) {
  Rational x = 0;
  for (std::size_t i = cf.size(); i >= 1; --i) x = Rational(1) / (Rational(cf.quotient(i)) + x);
  return x;
}

const double kTwoPi = 2 * 3.14159265358979323846;

// lift_{a,0}(x) straight from the argument of J(e^{2 pi i x}).
double lift0(double a, double x) { return x + std::atan2(std::sin(kTwoPi * x), a + std::cos(kTwoPi * x)) / (kTwoPi / 2); }

// rho(f_t) is nondecreasing in t. For want = below: the supremum of the t
// with rho < beta; for want = above: the infimum of the t with rho > beta.
double boundary_t(double a, const Rational& beta, Ordering want) {
  const BlaschkeFamily<double> probe(a, 0.0);
  const double b = beta.to_double(), h = probe.max_offset() + 1e-9;
  double lo = b - h, hi = b + h;  // rho(lo) < beta < rho(hi)
  for (int i = 0; i < 60 && hi - lo > 1e-15; ++i) {
    const double mid = (lo + hi) / 2;
    const Ordering o = compare_to_rational(probe.with_t(mid), beta).ordering;
    if (want == Ordering::below) (o == Ordering::below ? lo : hi) = mid;
    else (o == Ordering::above ? hi : lo) = mid;
  }
  return want == Ordering::below ? hi : lo;
}

}  // namespace

DerivativeFormula closed_form_derivative() {
  return [](double a, double x) { return BlaschkeFamily<double>(a, 0.0).derivative(x); };
}

DerivativeFormula sign_fault_derivative() {
  return [](double a, double x) {
    const double c = std::cos(kTwoPi * x);
    return (a * a - 4 * a * c + 3) / (a * a - 2 * a * c + 1);
  };
}

PropertyResult check_determinants(int cfs, int max_len, int max_quotient, std::uint64_t seed) {
  return timed("convergent determinant", [&](PropertyResult& r) {
    Rng rng(seed);
    std::size_t checked = 0;
    for (int k = 0; k < cfs; ++k) {
      const auto cf = random_cf(rng, static_cast<std::size_t>(uniform(rng, 1, max_len)), max_quotient);
      const ConvergentTable t(cf);
      for (std::size_t n = 0; n < cf.size(); ++n) {
        const BigInt det = t.p(n) * t.q(n + 1) - t.p(n + 1) * t.q(n);
        ++checked;
        if (abs(det) != 1) fail(r, "cf " + cf.to_string() + " n = " + std::to_string(n) + " det = " + det.str());
      }
      if (t.convergent(cf.size()) != backward_value(cf)) fail(r, "cf " + cf.to_string() + " value mismatch");
    }
    if (r.passed) r.detail = std::to_string(checked) + " determinants";
  });
}

PropertyResult check_ostrowski(int cfs, int per_cf, std::uint64_t seed) {
  return timed("ostrowski reconstruction", [&](PropertyResult& r) {
    Rng rng(seed);
    std::size_t checked = 0;
    for (int k = 0; k < cfs; ++k) {
      const auto cf = random_cf(rng, static_cast<std::size_t>(uniform(rng, 2, 30)), 50);
      const ConvergentTable t(cf);
      const BigInt top = t.q(cf.size());
      boost::random::mt19937_64 big_rng(rng());
      boost::random::uniform_int_distribution<BigInt> pick(1, top - 1);
      for (int i = 0; i < per_cf; ++i) {
        const BigInt l = i < 3 ? BigInt(i + 1) : pick(big_rng);
        if (l >= top) continue;
        const auto od = ostrowski_decompose(l, t);
        BigInt sum = 0;
        for (std::size_t j = 0; j <= od.top; ++j) {
          sum += od.digits[j] * t.q(j);
          if (od.digits[j] > t.a(j + 1)) fail(r, "digit above quotient for l = " + l.str() + " in " + cf.to_string());
        }
        ++checked;
        if (sum != l) fail(r, "l = " + l.str() + " reconstructs to " + sum.str() + " in " + cf.to_string());
      }
    }
    if (r.passed) r.detail = std::to_string(checked) + " reconstructions";
  });
}

PropertyResult check_cf_roundtrip(int count, std::uint64_t seed) {
  return timed("cf round trip", [&](PropertyResult& r) {
    Rng rng(seed);
    for (int k = 0; k < count; ++k) {
      const auto cf = random_cf(rng, static_cast<std::size_t>(uniform(rng, 1, 20)), 30);
      const auto back = cf_expand(backward_value(cf), 64);
      if (back.status != CfStatus::exact || !(back.cf == cf)) {
        fail(r, cf.to_string() + " came back as " + back.cf.to_string());
      }
    }
    if (r.passed) r.detail = std::to_string(count) + " expansions";
  });
}

PropertyResult check_derivative_fd(const std::vector<double>& as, std::size_t grid, const DerivativeFormula& formula) {
  return timed("derivative vs finite difference", [&](PropertyResult& r) {
    const double h = 1e-5;
    double worst = 0;
    for (double a : as) {
      for (std::size_t i = 0; i < grid; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(grid);
        const double fd = (lift0(a, x + h) - lift0(a, x - h)) / (2 * h);
        const double got = formula(a, x);
        const double rel = std::abs(got - fd) / std::abs(fd);
        worst = std::max(worst, rel);
        if (!(rel <= 1e-6)) {
          std::ostringstream os;
          os.precision(17);
          os << "a = " << a << " x = " << x << ": formula " << got << " vs difference " << fd;
          fail(r, os.str());
        }
      }
    }
    if (r.passed) r.detail = "max relative error " + format_real(worst, 3);
  });
}

PropertyResult check_derivative_integral(const std::vector<double>& as) {
  return timed("integral of Df", [&](PropertyResult& r) {
    // The trapezoid rule is spectrally accurate for periodic integrands.
    const std::size_t n = 4096;
    double worst = 0;
    for (double a : as) {
      const BlaschkeFamily<double> f(a, 0.0);
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) sum += f.derivative(static_cast<double>(i) / n);
      const double err = std::abs(sum / n - 1);
      worst = std::max(worst, err);
      if (!(err <= 1e-9)) fail(r, "a = " + format_real(a, 17) + " integral off by " + format_real(err, 3));
    }
    if (r.passed) r.detail = "max error " + format_real(worst, 3);
  });
}

PropertyResult check_derivative_extrema(const std::vector<double>& as) {
  return timed("derivative extrema", [&](PropertyResult& r) {
    for (double a : as) {
      const BlaschkeFamily<double> f(a, 0.0);
      const double top = f.derivative(0.0), bottom = f.derivative(0.5);
      if (std::abs(top - (a + 3) / (a + 1)) > 1e-12 || std::abs(bottom - (a - 3) / (a - 1)) > 1e-12) {
        fail(r, "a = " + format_real(a, 17) + " extrema " + format_real(top, 17) + ", " + format_real(bottom, 17));
      }
      for (int i = 1; i < 1024; ++i) {
        const double d = f.derivative(i / 1024.0);
        if (d > top * (1 + 1e-15) || d < bottom * (1 - 1e-15)) fail(r, "a = " + format_real(a, 17) + " not extremal");
      }
    }
    if (r.passed) r.detail = std::to_string(as.size()) + " parameters";
  });
}

PropertyResult check_exact_digits(int count, int max_den, std::uint64_t seed) {
  return timed("digits of exact rotations", [&](PropertyResult& r) {
    Rng rng(seed);
    for (int k = 0; k < count; ++k) {
      const long long q = uniform(rng, 2, max_den);
      long long p = uniform(rng, 1, q - 1);
      while (std::gcd(p, q) != 1) p = uniform(rng, 1, q - 1);
      const Rational rho(p, q);
      ExactRotation oracle(rho);
      const auto got = extract_digits(oracle, 64);
      const auto want = cf_expand(rho, 64);
      if (got.cf.quotients() != want.cf.quotients()) {
        fail(r, rho.to_string() + ": " + got.cf.to_string() + " vs " + want.cf.to_string());
      }
    }
    if (r.passed) r.detail = std::to_string(count) + " rationals";
  });
}

PropertyResult check_solve_roundtrip(double a, int targets, int length, double tol, std::uint64_t seed) {
  return timed("solve_t round trip", [&](PropertyResult& r) {
    Rng rng(seed);
    const int digits = working_digits_for(tol);
    const int saved = working_digits();
    if (digits > 0) set_working_digits(std::max(digits, saved));
    double widest = 0;
    for (int k = 0; k < targets; ++k) {
      const auto target = random_cf(rng, static_cast<std::size_t>(length), 3);
      std::size_t verified = 0;
      double width = 0;
      if (digits == 0) {
        const auto s = solve_t<double>(a, target, tol);
        verified = s.verified_digits;
        width = s.bracket_width;
      } else {
        const auto s = solve_t<Extended>(Extended(a), target, tol);
        verified = s.verified_digits;
        width = s.bracket_width;
      }
      widest = std::max(widest, width);
      if (verified < static_cast<std::size_t>(length) || !(width <= tol)) {
        fail(r, "target " + target.to_string() + ": " + std::to_string(verified) + " digits, bracket " +
                    format_real(width, 3));
      }
    }
    if (digits > 0) set_working_digits(saved);
    if (r.passed) r.detail = std::to_string(targets) + " targets, widest bracket " + format_real(widest, 3);
  });
}

PropertyResult check_farey_counting(int windows, int max_n, int max_B, std::uint64_t seed) {
  return timed("farey counting", [&](PropertyResult& r) {
    Rng rng(seed);
    std::size_t most = 0;
    for (int k = 0; k < windows; ++k) {
      const int n = static_cast<int>(uniform(rng, 1, max_n));
      const long long B = uniform(rng, 1, max_B);
      const auto prefix = random_cf(rng, static_cast<std::size_t>(2 * n - 1), 3);
      const FareyWindow w = farey_window(prefix, BigInt(B));
      const BigInt max_den = 2 * w.q_beta2;
      const auto found = enumerate_rationals(w.beta0, w.beta2, max_den);
      // Brute force: every p/q with q < max_den strictly inside the window.
      std::vector<Rational> brute;
      const long long N = max_den.convert_to<long long>();
      const auto& lo = w.beta0;
      const auto& hi = w.beta2;
      for (long long q = 1; q < N; ++q) {
        const long long p_lo = (lo.num() * q / lo.den()).convert_to<long long>();
        const long long p_hi = (hi.num() * q / hi.den()).convert_to<long long>() + 1;
        for (long long p = p_lo; p <= p_hi; ++p) {
          if (std::gcd(p, q) != 1) continue;
          const Rational x(p, q);
          if (lo < x && x < hi) brute.push_back(x);
        }
      }
      std::sort(brute.begin(), brute.end());
      const std::string where = "prefix " + prefix.to_string() + " B = " + std::to_string(B);
      if (found != brute) {
        fail(r, where + ": enumeration has " + std::to_string(found.size()) + ", brute force " +
                    std::to_string(brute.size()));
      }
      const std::size_t limit = B >= 3 ? 3 : 6;
      if (found.size() > limit) fail(r, where + ": " + std::to_string(found.size()) + " rationals");
      most = std::max(most, found.size());
    }
    if (r.passed) r.detail = std::to_string(windows) + " windows, at most " + std::to_string(most) + " rationals";
  });
}

PropertyResult check_orbit_deviation(double a, int pairs, std::uint64_t seed) {
  return timed("orbit deviation in Farey windows", [&](PropertyResult& r) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0, 1);
    double worst = 0;
    for (int k = 0; k < pairs; ++k) {
      const int n = static_cast<int>(uniform(rng, 1, 2));
      const long long B = uniform(rng, 1, 4);
      const auto prefix = random_cf(rng, static_cast<std::size_t>(2 * n - 1), 3);
      const FareyWindow w = farey_window(prefix, BigInt(B));
      // rho in [beta_0, beta_2] exactly between these two boundaries.
      const double lo = boundary_t(a, w.beta0, Ordering::below), hi = boundary_t(a, w.beta2, Ordering::above);
      const double s1 = lo + (hi - lo) * unit(rng), s2 = lo + (hi - lo) * unit(rng), x = unit(rng);
      const auto N = w.q_beta2.convert_to<std::uint64_t>();
      const double sum = orbit_deviation_sum(BlaschkeFamily<double>(a, s1), BlaschkeFamily<double>(a, s2), x, N);
      worst = std::max(worst, sum);
      if (!(sum <= 7)) {
        fail(r, "window (" + w.beta0.to_string() + ", " + w.beta2.to_string() + ") s = " + format_real(s1, 17) +
                    ", " + format_real(s2, 17) + " x = " + format_real(x, 17) + ": sum " + format_real(sum, 6));
      }
    }
    if (r.passed) r.detail = std::to_string(pairs) + " pairs, largest sum " + format_real(worst, 4);
  });
}

PropertyResult check_growth_lemma(int sequences, std::uint64_t seed) {
  return timed("growth lemma oracle", [&](PropertyResult& r) {
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0, 1);
    // Literal re-evaluation of both inequalities in long double.
    auto oracle = [](const std::vector<double>& A, double C) {
      auto slack = [](long double scale) { return 1e-14L * scale; };
      for (std::size_t k = 1; k + 1 < A.size(); ++k) {
        const long double lhs = 2.0L * A[k] - A[k - 1] - A[k + 1];
        const long double rhs = C * std::exp(-static_cast<long double>(A[k]));
        if (lhs - rhs > slack(std::abs(A[k - 1]) + 2 * std::abs(A[k]) + std::abs(A[k + 1]) + rhs)) {
          return LemmaVerdict::hypothesis_violated;
        }
      }
      const long double s = std::sqrt(static_cast<long double>(C) / 2);
      for (std::size_t k = 1; k < A.size(); ++k) {
        const long double bound = 2 * std::log(static_cast<long double>(k) * s + 1);
        if (A[k] - bound > slack(std::abs(A[k]) + bound)) return LemmaVerdict::linear_growth;
      }
      return LemmaVerdict::log_bounded;
    };
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < sequences; ++i) {
      const std::size_t len = static_cast<std::size_t>(uniform(rng, 3, i % 10 == 0 ? 10001 : 400));
      std::vector<double> A(len, 0.0);
      double C = 0.1 + 5 * unit(rng);
      switch (i % 5) {
        case 0: {  // the exact-bound sequence
          const double s = std::sqrt(C / 2);
          for (std::size_t k = 0; k < len; ++k) A[k] = 2 * std::log(static_cast<double>(k) * s + 1);
          break;
        }
        case 1: {  // linear, with C large enough for the hypothesis
          const double slope = 0.001 + unit(rng);
          for (std::size_t k = 0; k < len; ++k) A[k] = slope * static_cast<double>(k);
          C = 1e3;
          break;
        }
        case 2:  // identically zero
          break;
        default: {  // random concave-ish walks
          const double drift = 0.3 * unit(rng);
          for (std::size_t k = 1; k < len; ++k) {
            A[k] = A[k - 1] + drift / std::sqrt(static_cast<double>(k)) + 0.02 * unit(rng);
          }
        }
      }
      const auto got = growth_lemma_check(A, C);
      const auto want = oracle(A, C);
      counts[static_cast<int>(want)]++;
      if (got.verdict != want) {
        fail(r, "sequence " + std::to_string(i) + " (kind " + std::to_string(i % 5) + ", length " +
                    std::to_string(len) + ", C = " + format_real(C, 17) + "): " + to_string(got.verdict) + " vs " +
                    to_string(want));
      }
    }
    if (r.passed) {
      r.detail = std::to_string(sequences) + " sequences: " + std::to_string(counts[0]) + " log_bounded, " +
                 std::to_string(counts[1]) + " linear_growth, " + std::to_string(counts[2]) + " hypothesis_violated";
    }
  });
}

PropertyResult check_construction_smoke() {
  return timed("one-stage construction smoke run", [&](PropertyResult& r) {
    ConstructionOptions o;
    o.grid = 128;
    o.q_budget = 1000;
    o.c0_range = 200;
    o.report_range = 400;
    o.safety = 1;
    const auto res = run_construction(6.0, ThetaSpec::parse("2*n"), 1, o);
    if (res.aborted) return fail(r, "aborted: " + *res.aborted);
    const Stage& s = res.state.stages.at(0);
    if (!s.accepted.passes()) fail(r, "accepted A = " + std::to_string(s.A) + " violates the window");
    if (!s.witness || s.witness->max_ratio < 1) fail(r, "no witness for A + 1");
    const auto q = s.window_q.convert_to<std::int64_t>();
    if (s.witness) {
      const auto j = std::llabs(s.witness->argmax_j);
      if (j < q || j > static_cast<std::int64_t>(s.A + 1) * q) fail(r, "witness j outside the window");
    }
    if (r.passed) {
      r.detail = "n = " + std::to_string(s.n) + ", A = " + std::to_string(s.A) + ", witness ratio " +
                 format_real(s.witness->max_ratio, 4);
    }
  });
}

bool VerifyReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.passed; });
}

VerifyReport run_verify(const VerifyOptions& options, const std::function<void(const PropertyResult&)>& progress) {
  const bool full = options.level == VerifyLevel::full;
  const std::uint64_t s = options.seed;
  const std::vector<double> as{3.5, 5, 50, 1000};
  VerifyReport report;
  auto add = [&](PropertyResult r) {
    if (progress) progress(r);
    report.results.push_back(std::move(r));
  };
  add(check_determinants(full ? 200 : 50, 30, 50, s));
  add(check_ostrowski(full ? 200 : 20, full ? 1000 : 100, s + 1));
  add(check_cf_roundtrip(full ? 500 : 100, s + 2));
  add(check_derivative_fd(as, 1024,
                          options.inject_derivative_fault ? sign_fault_derivative() : closed_form_derivative()));
  add(check_derivative_integral(as));
  add(check_derivative_extrema(as));
  add(check_exact_digits(full ? 50 : 20, 500, s + 3));
  add(check_farey_counting(full ? 100 : 30, 3, 10, s + 4));
  add(check_orbit_deviation(6.0, full ? 20 : 5, s + 5));
  add(check_growth_lemma(full ? 500 : 100, s + 6));
  add(check_solve_roundtrip(6.0, full ? 10 : 3, 8, full ? 1e-20 : 1e-13, s + 7));
  if (full) add(check_construction_smoke());
  return report;
}

}  // namespace rotacalc
