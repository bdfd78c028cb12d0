#include "rotacalc/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rotacalc/parallel.hpp"

namespace rotacalc {

namespace {

std::uint64_t checked_denominator(const Rational& pq, std::uint64_t budget) {
  if (pq.den() > budget) {
    throw DomainError("denominator " + pq.den().str() + " exceeds the iteration budget " + std::to_string(budget));
  }
  return pq.den().convert_to<std::uint64_t>();
}

std::size_t floor_pow2(std::uint64_t x) {
  std::size_t p = 1;
  while (p * 2 <= x) p *= 2;
  return p;
}

constexpr double kGolden = 0.6180339887498949;

}  // namespace

std::string to_string(Ordering ordering) {
  switch (ordering) {
    case Ordering::below: return "below";
    case Ordering::locked: return "locked";
    case Ordering::above: return "above";
  }
  return "?";
}

std::string to_string(DigitStatus status) {
  switch (status) {
    case DigitStatus::complete: return "complete";
    case DigitStatus::rational: return "rational";
    case DigitStatus::budget_exhausted: return "budget_exhausted";
    case DigitStatus::inconsistent: return "inconsistent";
  }
  return "?";
}

// ------------------------------------------------------------- Birkhoff

template <class Real>
RotationEstimate rotation_birkhoff(const BlaschkeFamily<Real>& map, std::uint64_t n) {
  if (n == 0) throw DomainError("rotation_birkhoff needs n >= 1");
  LiftOrbit<Real> orbit(map, Real(0));
  orbit.advance(n);
  const Real displacement = orbit.displacement();
  RotationEstimate estimate;
  estimate.iterations = n;
  estimate.method = RotationMethod::birkhoff;
  estimate.point = to_double(displacement) / static_cast<double>(n);
  estimate.error_bound = 1.0 / static_cast<double>(n);
  const Rational center = exact_rational(displacement);
  estimate.left = (center - Rational(1)) / Rational(BigInt(n));
  estimate.right = (center + Rational(1)) / Rational(BigInt(n));
  return estimate;
}

template RotationEstimate rotation_birkhoff<double>(const BlaschkeFamily<double>&, std::uint64_t);
template RotationEstimate rotation_birkhoff<Extended>(const BlaschkeFamily<Extended>&, std::uint64_t);

// ------------------------------------------------------------- compare

template <class Real>
ExtremePoint<Real> locate_extreme(const BlaschkeFamily<Real>& map, std::uint64_t q, const Real& p, const Real& guess,
                                  double half_width, int direction) {
  using std::abs;
  using boost::multiprecision::abs;
  if (q == 0) throw DomainError("locate_extreme needs q >= 1");
  const BlaschkeFamily<double> fast(map.a_double(), map.t_double());
  const double pd = to_double(p);
  auto objective = [&](double x) {
    LiftOrbit<double> orbit(fast, x);
    orbit.advance(q);
    return direction * (orbit.displacement() - pd);
  };
  const double center = to_double(guess);
  double lo = center - half_width, hi = center + half_width;
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 28; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = objective(x2);
    }
  }
  // Newton on g' = Df^q - 1 with g' in Real and g'' = Df^q D log Df^q in
  // double: the relative error of g'' only slows convergence.
  Real x = Real(f1 > f2 ? x1 : x2);
  std::optional<ExtremePoint<Real>> best;
  bool converged = false;
  for (int it = 0; it < 16; ++it) {
    LiftOrbit<Real> orbit(map, x, {.track_slope = true, .track_real_derivative = is_extended_v<Real>});
    orbit.advance(q);
    ExtremePoint<Real> here;
    here.x = x;
    here.value = orbit.displacement() - p;
    const Real gp = is_extended_v<Real> ? Real(orbit.real_derivative() - 1) : Real(std::expm1(orbit.log_derivative()));
    here.derivative_minus_one = to_double(gp);
    here.second_derivative = std::exp(orbit.log_derivative()) * orbit.slope();
    if (!best || direction * here.value > direction * best->value ||
        (here.value == best->value && abs(gp) < std::abs(best->derivative_minus_one))) {
      best = here;
    }
    if (converged) break;
    if (!(direction * here.second_derivative < 0)) break;  // not curved toward an extreme
    Real step = gp / Real(here.second_derivative);
    if (abs(step) > Real(half_width)) step = step > 0 ? Real(half_width) : Real(-half_width);
    x -= step;
    if (abs(step) < 4 * unit_roundoff<Real>() * 1e6 || (!is_extended_v<Real> && abs(step) < 1e-13)) converged = true;
  }
  return *best;
}

template ExtremePoint<double> locate_extreme<double>(const BlaschkeFamily<double>&, std::uint64_t, const double&,
                                                     const double&, double, int);
template ExtremePoint<Extended> locate_extreme<Extended>(const BlaschkeFamily<Extended>&, std::uint64_t,
                                                         const Extended&, const Extended&, double, int);

namespace {

template <class Real>
class CompareEngine {
 public:
  CompareEngine(const BlaschkeFamily<Real>& map, const Rational& pq, const CompareOptions& options)
      : map_(map),
        fast_(map.a_double(), map.t_double()),
        options_(options),
        q_(checked_denominator(pq, options.budget)),
        p_(pq.num().template convert_to<double>()),
        p_real_(Rational(pq.num()).to_real<Real>()) {
    using std::abs;
    using boost::multiprecision::abs;
    t_gap_ = to_double(abs(map.t() - Real(map.t_double())));
  }

  CompareResult<Real> run() {
    const std::uint64_t cap_grid = std::max<std::uint64_t>(4, options_.work_cap / std::max<std::uint64_t>(q_, 1));
    std::size_t grid = std::min<std::size_t>(floor_pow2(std::max<std::size_t>(options_.min_grid, 4)),
                                             floor_pow2(cap_grid));
    grid = std::max<std::size_t>(grid, 4);
    sample(grid);
    while (true) {
      summarize();
      if (auto decided = decide_from_grid()) return *decided;
      // A finer grid only shrinks the Lipschitz margin; it cannot resolve an
      // extreme that sits within double resolution of zero.
      if (std::abs(values_[imax_]) <= err_double_ || std::abs(values_[imin_]) <= err_double_) break;
      const std::size_t next = values_.size() * 2;
      if (next > options_.max_grid || next * q_ > std::max<std::uint64_t>(options_.work_cap, 4 * q_)) break;
      sample(next);
    }
    return refine();
  }

 private:
  struct Sample {
    double g;
    double log_df;
    double growth;  // max_i log Df^{q-i}(x_i): how much a step-i rounding error grows
  };

  Sample eval_double(double x) const {
    LiftOrbit<double> orbit(fast_, x);
    double lowest = 0;
    for (std::uint64_t i = 0; i < q_; ++i) {
      orbit.step();
      lowest = std::min(lowest, orbit.log_derivative());
    }
    return {orbit.displacement() - p_, orbit.log_derivative(), orbit.log_derivative() - lowest};
  }

  // Extends the grid to `size` points, reusing the existing ones.
  void sample(std::size_t size) {
    std::vector<double> values(size), logs(size), growth(size);
    const std::size_t old = values_.size();
    const std::size_t stride = old == 0 ? 0 : size / old;
    for (std::size_t i = 0; i < old; ++i) {
      values[i * stride] = values_[i];
      logs[i * stride] = logs_[i];
      growth[i * stride] = growth_[i];
    }
    parallel_for(size, [&](std::size_t i) {
      if (stride != 0 && i % stride == 0) return;
      const Sample s = eval_double(static_cast<double>(i) / static_cast<double>(size));
      values[i] = s.g;
      logs[i] = s.log_df;
      growth[i] = s.growth;
    });
    values_ = std::move(values);
    logs_ = std::move(logs);
    growth_ = std::move(growth);
  }

  void summarize() {
    const std::size_t n = values_.size();
    imax_ = imin_ = 0;
    double lip = 0, norm = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (values_[i] > values_[imax_]) imax_ = i;
      if (values_[i] < values_[imin_]) imin_ = i;
      lip = std::max(lip, std::abs(std::expm1(logs_[i])));
      norm = std::max(norm, std::exp(growth_[i]));
    }
    lipschitz_ = 2 * lip;
    norm_ = norm;
    h_ = 1.0 / static_cast<double>(n);
    margin_ = lipschitz_ * h_ / 2;
    const double eps = std::numeric_limits<double>::epsilon();
    const double q = static_cast<double>(q_);
    err_double_ = 32 * q * eps * norm_ + 4 * q * norm_ * t_gap_ + 8 * eps * (1 + std::abs(p_) + q);
    const double u = to_double(unit_roundoff<Real>());
    err_real_ = 32 * q * u * norm_ + 8 * u * (1 + std::abs(p_) + q);
    if constexpr (std::is_same_v<Real, double>) err_real_ = err_double_;
  }

  CompareResult<Real> base_result() const {
    CompareResult<Real> r;
    r.grid = values_.size();
    r.lipschitz = lipschitz_;
    r.max_norm = norm_;
    r.tolerance = err_double_;
    r.max_g = values_[imax_];
    r.min_g = values_[imin_];
    r.argmax = Real(static_cast<double>(imax_) * h_);
    r.argmin = Real(static_cast<double>(imin_) * h_);
    return r;
  }

  std::optional<CompareResult<Real>> decide_from_grid() const {
    const double gmax = values_[imax_], gmin = values_[imin_];
    CompareResult<Real> r = base_result();
    r.certified = true;
    if (gmax + margin_ + err_double_ < 0) {
      r.ordering = Ordering::below;
      return r;
    }
    if (gmin - margin_ - err_double_ > 0) {
      r.ordering = Ordering::above;
      return r;
    }
    if (gmax > err_double_ && gmin < -err_double_) {
      r.ordering = Ordering::locked;
      return r;
    }
    return std::nullopt;
  }

  struct Refined {
    Real x;
    Real value;
  };

  Refined refine_node(std::size_t i, int direction) const {
    auto e = locate_extreme(map_, q_, p_real_, Real(static_cast<double>(i) * h_), h_, direction);
    return Refined{e.x, e.value};
  }

  // Best refinement among the strongest grid-local extremes.
  Refined refine_extreme(int direction, bool* others_clear) const {
    const std::size_t n = values_.size();
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = direction * values_[i];
      if (v >= direction * values_[(i + n - 1) % n] && v >= direction * values_[(i + 1) % n]) candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](std::size_t x, std::size_t y) { return direction * values_[x] > direction * values_[y]; });
    const std::size_t keep = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(options_.refine_candidates));
    std::optional<Refined> best;
    for (std::size_t c = 0; c < keep; ++c) {
      Refined r = refine_node(candidates[c], direction);
      if (!best || direction * r.value > direction * best->value) best = r;
    }
    // Cells not refined are clear when their Lipschitz bound stays on the
    // far side of zero.
    *others_clear = true;
    for (std::size_t c = keep; c < candidates.size(); ++c) {
      if (direction * values_[candidates[c]] + margin_ + err_double_ >= 0) *others_clear = false;
    }
    return *best;
  }

  CompareResult<Real> refine() const {
    const double gmax = values_[imax_], gmin = values_[imin_];
    CompareResult<Real> r = base_result();
    r.tolerance = err_real_;
    const bool max_ambiguous = !(gmax > err_double_) && !(gmax + margin_ + err_double_ < 0);
    const bool min_ambiguous = !(gmin < -err_double_) && !(gmin - margin_ - err_double_ > 0);
    // -1 negative, 0 unresolved zero, +1 positive
    int max_sign = gmax > err_double_ ? 1 : -1;
    int min_sign = gmin < -err_double_ ? -1 : 1;
    bool certified = true;
    if (max_ambiguous) {
      bool clear = false;
      Refined m = refine_extreme(+1, &clear);
      r.max_g = m.value;
      r.argmax = m.x;
      if (m.value > err_real_) {
        max_sign = 1;
      } else if (m.value < -err_real_) {
        max_sign = -1;
        certified = certified && clear;
      } else {
        max_sign = 0;
        certified = false;
      }
    }
    if (min_ambiguous && max_sign >= 0) {
      bool clear = false;
      Refined m = refine_extreme(-1, &clear);
      r.min_g = m.value;
      r.argmin = m.x;
      if (m.value < -err_real_) {
        min_sign = -1;
      } else if (m.value > err_real_) {
        min_sign = 1;
        certified = certified && clear;
      } else {
        min_sign = 0;
        certified = false;
      }
    }
    if (max_sign < 0) r.ordering = Ordering::below;
    else if (min_sign > 0) r.ordering = Ordering::above;
    else r.ordering = Ordering::locked;
    r.certified = certified;
    return r;
  }

  const BlaschkeFamily<Real>& map_;
  BlaschkeFamily<double> fast_;
  CompareOptions options_;
  std::uint64_t q_;
  double p_;
  Real p_real_;
  double t_gap_ = 0;
  std::vector<double> values_, logs_, growth_;
  std::size_t imax_ = 0, imin_ = 0;
  double lipschitz_ = 0, norm_ = 1, h_ = 1, margin_ = 0, err_double_ = 0, err_real_ = 0;
};

}  // namespace

template <class Real>
CompareResult<Real> compare_to_rational(const BlaschkeFamily<Real>& map, const Rational& pq,
                                        const CompareOptions& options) {
  return CompareEngine<Real>(map, pq, options).run();
}

template CompareResult<double> compare_to_rational<double>(const BlaschkeFamily<double>&, const Rational&,
                                                           const CompareOptions&);
template CompareResult<Extended> compare_to_rational<Extended>(const BlaschkeFamily<Extended>&, const Rational&,
                                                               const CompareOptions&);

// --------------------------------------------------------------- oracles

std::optional<int> ExactRotation::sign(const BigInt& m, const BigInt& j) {
  const BigInt v = m * rho_.num() - j * rho_.den();
  return v.sign();
}

Ordering ExactRotation::compare(const Rational& pq) {
  if (rho_ < pq) return Ordering::below;
  if (rho_ > pq) return Ordering::above;
  return Ordering::locked;
}

std::optional<int> RealRotation::sign(const BigInt& m, const BigInt& j) {
  const Extended v = Rational(m).to_real<Extended>() * rho_ - Rational(j).to_real<Extended>();
  if (abs(v) <= tolerance_ * (1 + Rational(m).to_real<Extended>())) return std::nullopt;
  return v > 0 ? 1 : -1;
}

Ordering RealRotation::compare(const Rational& pq) {
  const Extended diff = rho_ - pq.to_real<Extended>();
  if (abs(diff) <= tolerance_) return Ordering::locked;
  return diff < 0 ? Ordering::below : Ordering::above;
}

BigInt RealRotation::integer_hint() const { return static_cast<BigInt>(floor(rho_)); }

template <class Real>
MapRotation<Real>::MapRotation(const BlaschkeFamily<Real>& map, std::uint64_t budget, CompareOptions compare_options)
    : map_(&map), budget_(budget), compare_options_(compare_options), orbit_(map, Real(0)) {
  compare_options_.budget = std::max(compare_options_.budget, budget);
}

template <class Real>
std::optional<int> MapRotation<Real>::sign(const BigInt& m, const BigInt& j) {
  if (m > budget_) throw DomainError("iteration budget exhausted");
  const auto target = m.convert_to<std::uint64_t>();
  if (target < orbit_.steps()) {
    orbit_ = LiftOrbit<Real>(*map_, Real(0));
    min_log_ = 0;
  }
  while (orbit_.steps() < target) {
    orbit_.step();
    min_log_ = std::min(min_log_, orbit_.log_derivative());
  }
  const Real value = orbit_.displacement() - Rational(j).to_real<Real>();
  const double u = to_double(unit_roundoff<Real>());
  const double mm = static_cast<double>(target);
  // A rounding error at step i grows by Df^{m-i}(x_i) <= exp(L_m - min_i L_i).
  double err = 64 * mm * u * std::exp(orbit_.log_derivative() - min_log_) + 8 * u * (1 + mm);
  if constexpr (std::is_same_v<Real, Extended>) {
    // The shadow-free part of the error: t itself is exact in Real.
    err = std::max(err, 1e-300);
  }
  const double v = to_double(value);
  if (!(std::abs(v) > err)) return std::nullopt;
  return v > 0 ? 1 : -1;
}

template <class Real>
Ordering MapRotation<Real>::compare(const Rational& pq) {
  ++compare_calls_;
  return compare_to_rational(*map_, pq, compare_options_).ordering;
}

template <class Real>
BigInt MapRotation<Real>::integer_hint() const {
  return BigInt(static_cast<long long>(std::floor(map_->t_double())));
}

template class MapRotation<double>;
template class MapRotation<Extended>;

// --------------------------------------------------------- extract_digits

template <DigitOracle Oracle>
DigitsResult extract_digits(Oracle& oracle, std::size_t count) {
  DigitsResult result;
  auto ordering_sign = [](Ordering o) { return o == Ordering::above ? 1 : (o == Ordering::below ? -1 : 0); };

  // Integer part by direct comparison: a single iterate cannot be trusted
  // when rho is an integer.
  BigInt k_int = oracle.integer_hint();
  for (int guard = 0;; ++guard) {
    if (guard > 64) throw DomainError("could not locate the integer part of the rotation number");
    const int lower = ordering_sign(oracle.compare(Rational(k_int)));
    if (lower == 0) {
      result.integer_part = k_int;
      result.status = DigitStatus::rational;
      return result;
    }
    if (lower < 0) {
      k_int -= 1;
      continue;
    }
    const int upper = ordering_sign(oracle.compare(Rational(k_int + 1)));
    if (upper == 0) {
      result.integer_part = k_int + 1;
      result.status = DigitStatus::rational;
      return result;
    }
    if (upper > 0) {
      k_int += 1;
      continue;
    }
    break;
  }
  result.integer_part = k_int;

  // sign(m rho' - j) with rho' = rho - k_int.
  auto resolve = [&](const BigInt& m, const BigInt& j) -> int {
    const BigInt shifted = j + m * k_int;
    if (m > result.max_iterate) result.max_iterate = m;
    if (auto s = oracle.sign(m, shifted); s && *s != 0) return *s;
    return ordering_sign(oracle.compare(Rational(shifted, m)));
  };

  BigInt p_prev = 1, q_prev = 0, p = 0, q = 1;
  int side_prev = -1;  // sign(q_{-1} rho - p_{-1}) = sign(-1)
  for (std::size_t n = 0; n < count; ++n) {
    BigInt k = 0;
    bool exact_hit = false;
    while (true) {
      const BigInt m = q_prev + (k + 1) * q;
      const BigInt j = p_prev + (k + 1) * p;
      if (m > BigInt(oracle.budget())) {
        result.status = DigitStatus::budget_exhausted;
        return result;
      }
      const int s = resolve(m, j);
      if (s == 0) {
        exact_hit = true;
        k += 1;
        break;
      }
      if (s != side_prev) break;
      k += 1;
    }
    if (k == 0) {
      // The mediant already crossed: rho can only be the current convergent.
      const bool locked = n > 0 && oracle.compare(Rational(p + q * k_int, q)) == Ordering::locked;
      result.status = locked ? DigitStatus::rational : DigitStatus::inconsistent;
      return result;
    }
    result.cf.push_back(k);
    BigInt p_next = p_prev + k * p;
    BigInt q_next = q_prev + k * q;
    p_prev = std::move(p);
    q_prev = std::move(q);
    p = std::move(p_next);
    q = std::move(q_next);
    side_prev = -side_prev;  // now the side of index n
    if (exact_hit) {
      result.status = DigitStatus::rational;
      return result;
    }
    // Index n + 1 convergent: even indices lie below rho, odd above.
    const int expected = (n + 1) % 2 == 0 ? 1 : -1;
    const int observed = ordering_sign(oracle.compare(Rational(p + q * k_int, q)));
    if (observed == 0) {
      result.status = DigitStatus::rational;
      return result;
    }
    if (observed != expected) {
      result.status = DigitStatus::inconsistent;
      return result;
    }
  }
  result.status = DigitStatus::complete;
  return result;
}

template DigitsResult extract_digits<ExactRotation>(ExactRotation&, std::size_t);
template DigitsResult extract_digits<RealRotation>(RealRotation&, std::size_t);
template DigitsResult extract_digits<MapRotation<double>>(MapRotation<double>&, std::size_t);
template DigitsResult extract_digits<MapRotation<Extended>>(MapRotation<Extended>&, std::size_t);

template <class Real>
DigitsResult extract_digits(const BlaschkeFamily<Real>& map, std::size_t count, std::uint64_t budget,
                            const CompareOptions& compare_options) {
  MapRotation<Real> oracle(map, budget, compare_options);
  return extract_digits(oracle, count);
}

template DigitsResult extract_digits<double>(const BlaschkeFamily<double>&, std::size_t, std::uint64_t,
                                             const CompareOptions&);
template DigitsResult extract_digits<Extended>(const BlaschkeFamily<Extended>&, std::size_t, std::uint64_t,
                                               const CompareOptions&);

}  // namespace rotacalc
