#include "rotacalc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rotacalc/growth.hpp"
#include "rotacalc/parallel.hpp"

namespace rotacalc {

int working_digits_for(double tol) {
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  if (tol >= 1e-13) return 0;
  return std::max(kDefaultDigits, static_cast<int>(std::ceil(-std::log10(tol))) + 20);
}

namespace {

template <class Real>
void check_precision(double tol) {
  if constexpr (is_extended_v<Real>) {
    if (working_digits() < -std::log10(tol) + 5) {
      throw DomainError("working precision of " + std::to_string(working_digits()) +
                        " digits cannot resolve tolerance " + format_real(tol, 3));
    }
  } else {
    if (tol < 1e-15) throw DomainError("double arithmetic cannot resolve tolerance " + format_real(tol, 3));
  }
}

// lift_t^q(0) - p.
template <class Real>
Real periodic_residual(const BlaschkeFamily<Real>& map, std::uint64_t q, const Real& p) {
  LiftOrbit<Real> orbit(map, Real(0));
  orbit.advance(q);
  return orbit.displacement() - p;
}

template <class Real>
bool narrow(const Real& lo, const Real& hi, double tol) {
  const Real mid = (lo + hi) / 2;
  return to_double(Real(hi - lo)) <= tol || mid <= lo || mid >= hi;
}

constexpr int kMaxBisections = 4000;

}  // namespace

template <class Real>
PlateauInterval<Real> plateau_endpoints(const Real& a, const Rational& pq, double tol, const CompareOptions& options) {
  using std::asin;
  using boost::multiprecision::asin;
  check_precision<Real>(tol);
  if (pq.den() > options.budget) throw DomainError("denominator exceeds the iteration budget");
  const auto q = pq.den().convert_to<std::uint64_t>();
  const Real p = Rational(pq.num()).to_real<Real>();
  const BlaschkeFamily<Real> base(a, Real(0));
  const Real center = pq.to_real<Real>();
  const Real reach = base.max_offset() * Real(1.001) + Real(tol);

  PlateauInterval<Real> out;
  out.pq = pq;

  // lift_t^q(0) - p increases with t and changes sign on this bracket.
  Real lo = center - reach, hi = center + reach;
  for (int i = 0; i < kMaxBisections && !narrow(lo, hi, tol / 4); ++i) {
    const Real mid = (lo + hi) / 2;
    const Real r = periodic_residual(base.with_t(mid), q, p);
    if (r == 0) {
      lo = hi = mid;
      break;
    }
    (r < 0 ? lo : hi) = mid;
  }
  out.t_locked = (lo + hi) / 2;
  const auto seed = compare_to_rational(base.with_t(out.t_locked), pq, options);
  if (seed.ordering != Ordering::locked) {
    throw DomainError("no locked parameter found for " + pq.to_string() + " at this precision (plateau narrower than " +
                      format_real(tol, 3) + "?)");
  }
  if (!seed.certified) ++out.uncertified;

  // Left end: below | locked.
  lo = center - reach;
  hi = out.t_locked;
  for (int i = 0; i < kMaxBisections && !narrow(lo, hi, tol); ++i) {
    const Real mid = (lo + hi) / 2;
    const auto c = compare_to_rational(base.with_t(mid), pq, options);
    if (!c.certified) ++out.uncertified;
    (c.ordering == Ordering::below ? lo : hi) = mid;
  }
  out.t_minus = hi;
  out.residual_minus = to_double(Real(hi - lo));

  // Right end: locked | above.
  lo = out.t_locked;
  hi = center + reach;
  for (int i = 0; i < kMaxBisections && !narrow(lo, hi, tol); ++i) {
    const Real mid = (lo + hi) / 2;
    const auto c = compare_to_rational(base.with_t(mid), pq, options);
    if (!c.certified) ++out.uncertified;
    (c.ordering == Ordering::above ? hi : lo) = mid;
  }
  out.t_plus = lo;
  out.residual_plus = to_double(Real(hi - lo));
  return out;
}

template <class Real>
SolveResult<Real> solve_t(const Real& a, const ContinuedFraction& target, double tol, const SolveOptions& options) {
  check_precision<Real>(tol);
  if (target.empty()) throw DomainError("solve_t needs at least one digit");
  const ConvergentTable table(target);
  const std::size_t n = target.size();
  if (table.q(n) > options.compare.budget) throw DomainError("q_n of the target exceeds the iteration budget");
  const BlaschkeFamily<Real> base(a, Real(0));

  SolveResult<Real> out;
  out.target = target;

  // rho(t) strictly between p_{n-1}/q_{n-1} and p_n/q_n; the alternation of
  // convergents makes every earlier one redundant. Even-index convergents sit
  // below the target, odd ones above.
  enum class Where { low, in, high };
  auto classify = [&](const Real& t) {
    const auto map = base.with_t(t);
    for (std::size_t k : {n, n - 1}) {
      const auto c = compare_to_rational(map, table.convergent(k), options.compare);
      ++out.comparisons;
      if (!c.certified) ++out.uncertified;
      if (k % 2 == 0 && c.ordering != Ordering::above) return Where::low;
      if (k % 2 == 1 && c.ordering != Ordering::below) return Where::high;
    }
    return Where::in;
  };

  // F(0) = 0 and F(1) = 1.
  Real lo = 0, hi = 1, inside = 0;
  bool found = false;
  for (int i = 0; i < kMaxBisections && !narrow(lo, hi, tol); ++i) {
    const Real mid = (lo + hi) / 2;
    const Where w = classify(mid);
    if (w == Where::in) {
      inside = mid;
      found = true;
      break;
    }
    (w == Where::low ? lo : hi) = mid;
  }
  if (!found) throw DomainError("no parameter with rotation number in the target cylinder was resolved");

  // Walk to the end next to the plateau of p_n/q_n: below the target set
  // when n is even, above it when n is odd.
  if (n % 2 == 0) {
    hi = inside;
    for (int i = 0; i < kMaxBisections && !narrow(lo, hi, tol); ++i) {
      const Real mid = (lo + hi) / 2;
      (classify(mid) == Where::in ? hi : lo) = mid;
    }
    out.t = hi;
  } else {
    lo = inside;
    for (int i = 0; i < kMaxBisections && !narrow(lo, hi, tol); ++i) {
      const Real mid = (lo + hi) / 2;
      (classify(mid) == Where::in ? lo : hi) = mid;
    }
    out.t = lo;
  }
  out.t_lo = lo;
  out.t_hi = hi;
  out.bracket_width = to_double(Real(hi - lo));

  if (options.verify) {
    DigitsResult digits = extract_digits(base.with_t(out.t), n, options.budget, options.compare);
    std::size_t agree = 0;
    if (digits.integer_part == 0) {
      while (agree < std::min(n, digits.cf.size()) && digits.cf.quotient(agree + 1) == target.quotient(agree + 1)) {
        ++agree;
      }
    }
    out.verified_digits = agree;
    out.digits = std::move(digits);
  }
  return out;
}

template <class Real>
TangencyWitness<Real> tangency_point(const Real& a, const Rational& pq, double tol, PlateauSide side,
                                     const CompareOptions& options) {
  TangencyWitness<Real> w;
  w.plateau = plateau_endpoints(a, pq, tol, options);
  w.pq = pq;
  w.t_star = side == PlateauSide::left ? w.plateau.t_minus : w.plateau.t_plus;
  const int direction = side == PlateauSide::left ? +1 : -1;
  const auto q = pq.den().convert_to<std::uint64_t>();
  const Real p = Rational(pq.num()).to_real<Real>();
  const double p_d = pq.num().convert_to<double>();
  const BlaschkeFamily<Real> map(a, w.t_star);
  const BlaschkeFamily<double> fast(map.a_double(), map.t_double());

  constexpr std::size_t kGrid = 8192;
  std::vector<double> g(kGrid);
  parallel_for(kGrid, [&](std::size_t i) {
    LiftOrbit<double> orbit(fast, static_cast<double>(i) / kGrid);
    orbit.advance(q);
    g[i] = direction * (orbit.displacement() - p_d);
  });
  const std::size_t best = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
  const auto extreme =
      locate_extreme(map, q, p, Real(static_cast<double>(best) / kGrid), 1.0 / kGrid, direction);
  w.x0 = extreme.x;
  w.g_value = extreme.value;
  w.derivative_minus_one = extreme.derivative_minus_one;
  w.second_derivative = extreme.second_derivative;

  // Difference step balancing truncation (step^2) against rounding (u/step^2).
  const double u = to_double(unit_roundoff<Real>());
  w.step = std::pow(u, 0.25);
  const Real delta = Real(w.step);
  auto g_at = [&](const Real& x) {
    LiftOrbit<Real> orbit(map, x);
    orbit.advance(q);
    return Real(orbit.displacement() - p);
  };
  const Real second = (g_at(w.x0 + delta) - 2 * g_at(w.x0) + g_at(w.x0 - delta)) / (delta * delta);
  w.second_deriv_proxy = to_double(second);
  const double noise = 64 * static_cast<double>(q) * u * (1 + std::abs(p_d)) / (w.step * w.step);
  w.flat = std::abs(w.second_deriv_proxy) <= noise;
  return w;
}

ProbeResult parabolic_growth_probe(const BlaschkeFamily<double>& map, double x0, std::uint64_t q, std::uint64_t l_min,
                                   std::uint64_t l_max, const std::vector<double>& theta, const ProbeOptions& options) {
  if (q < 1 || l_min < 1 || l_max < l_min) throw DomainError("probe needs q >= 1 and 1 <= l_min <= l_max");
  ProbeResult out;
  const std::size_t nodes = options.grid + options.local_grid;
  const std::uint64_t affordable = options.budget / (nodes * q);
  if (affordable < l_max) {
    out.truncated += static_cast<std::size_t>(l_max - std::max(affordable, l_min - 1));
    l_max = std::max(affordable, l_min - 1);
  }
  if (l_max < l_min) return out;

  const double uniform_h = 1.0 / static_cast<double>(options.grid);
  const double local_h =
      options.local_grid > 1 ? 2 * options.local_width / static_cast<double>(options.local_grid - 1) : uniform_h;
  auto node = [&](std::size_t i) {
    if (i < options.grid) return static_cast<double>(i) * uniform_h;
    return x0 - options.local_width + static_cast<double>(i - options.grid) * local_h;
  };
  const std::size_t count = static_cast<std::size_t>(l_max - l_min + 1);
  std::vector<double> best(count * nodes);
  parallel_for(nodes, [&](std::size_t i) {
    LiftOrbit<double> orbit(map, node(i));
    for (std::uint64_t l = 1; l <= l_max; ++l) {
      orbit.advance(q);
      if (l >= l_min) best[static_cast<std::size_t>(l - l_min) * nodes + i] = orbit.log_derivative();
    }
  });

  std::vector<ProbeRow> rows(count);
  std::vector<char> keep(count, 1);
  parallel_for(count, [&](std::size_t k) {
    const double* row = &best[k * nodes];
    const std::size_t arg = static_cast<std::size_t>(std::max_element(row, row + nodes) - row);
    const std::uint64_t l = l_min + k;
    const double h = arg < options.grid ? uniform_h : local_h;
    const NormPoint refined = refine_norm(map, l * q, node(arg), h, options.refine_steps, +1);
    if (!std::isfinite(refined.log_value) || refined.log_value > 700) {
      keep[k] = 0;
      return;
    }
    rows[k].l = l;
    rows[k].sup = std::exp(refined.log_value);
    rows[k].argmax = refined.x;
    const std::uint64_t n = l * q;
    if (n < theta.size()) rows[k].theta = theta[n];
  });
  for (std::size_t k = 0; k < count; ++k) {
    if (keep[k]) out.rows.push_back(rows[k]);
    else ++out.truncated;
  }
  if (out.rows.size() >= 2) {
    std::vector<double> lx, ly;
    for (const auto& r : out.rows) {
      lx.push_back(std::log(static_cast<double>(r.l)));
      ly.push_back(std::log(r.sup));
    }
    out.fit = fit_line(lx, ly);
  }
  for (const auto& r : out.rows) {
    if (!r.theta) continue;
    out.exceeds_theta = out.exceeds_theta.value_or(true) && r.sup > *r.theta;
  }
  return out;
}

template PlateauInterval<double> plateau_endpoints<double>(const double&, const Rational&, double,
                                                           const CompareOptions&);
template PlateauInterval<Extended> plateau_endpoints<Extended>(const Extended&, const Rational&, double,
                                                               const CompareOptions&);
template SolveResult<double> solve_t<double>(const double&, const ContinuedFraction&, double, const SolveOptions&);
template SolveResult<Extended> solve_t<Extended>(const Extended&, const ContinuedFraction&, double,
                                                 const SolveOptions&);
template TangencyWitness<double> tangency_point<double>(const double&, const Rational&, double, PlateauSide,
                                                        const CompareOptions&);
template TangencyWitness<Extended> tangency_point<Extended>(const Extended&, const Rational&, double, PlateauSide,
                                                            const CompareOptions&);

}  // namespace rotacalc
