#pragma once

// Rotation numbers of f_{a,t}: Birkhoff averages, certified comparison with a
// rational, and continued-fraction digits from closest-return combinatorics.

#include <concepts>
#include <cstdint>
#include <optional>
#include <string>

#include "rotacalc/circle_map.hpp"
#include "rotacalc/contfrac.hpp"

namespace rotacalc {

enum class RotationMethod { birkhoff, bracketing, digits };

struct RotationEstimate {
  Rational left;
  Rational right;
  double point = 0;
  std::uint64_t iterations = 0;
  RotationMethod method = RotationMethod::birkhoff;
  double error_bound = 0;
};

// point = lift^n(0)/n; |lift^n(0) - n rho| < 1 gives the bracket.
template <class Real>
RotationEstimate rotation_birkhoff(const BlaschkeFamily<Real>& map, std::uint64_t n);

// Position of rho(f) relative to p/q.
enum class Ordering { below, locked, above };
std::string to_string(Ordering ordering);

struct CompareOptions {
  std::size_t min_grid = 16;
  std::size_t max_grid = 4096;
  std::uint64_t work_cap = 4'000'000;  // grid * q in the double scan
  std::uint64_t budget = 1'000'000;    // largest admissible q
  int refine_candidates = 3;
};

template <class Real>
struct CompareResult {
  Ordering ordering = Ordering::locked;
  bool certified = false;
  // Extremes of g(x) = lift^q(x) - x - p: grid values, replaced by the
  // refined value for an extreme that needed refinement.
  Real min_g = 0;
  Real max_g = 0;
  Real argmin = 0;
  Real argmax = 0;
  std::size_t grid = 0;
  double lipschitz = 0;  // 2 max |Df^q - 1| on the grid
  double max_norm = 1;   // largest growth factor of a rounding error along the grid orbits
  double tolerance = 0;  // the |g| resolution the decision used
};

// Scans g on a uniform grid in double, certifies with the Lipschitz margin
// L h / 2, and refines an undecided extreme with Newton steps in Real on
// g' = Df^q - 1, g'' = Df^q D log Df^q. Uncertified answers come back with
// certified = false.
template <class Real>
CompareResult<Real> compare_to_rational(const BlaschkeFamily<Real>& map, const Rational& pq,
                                        const CompareOptions& options = {});

template <class Real>
struct ExtremePoint {
  Real x = 0;
  Real value = 0;                     // g(x) = lift^q(x) - x - p
  double derivative_minus_one = 0;  // Df^q(x) - 1
  double second_derivative = 0;     // Df^q(x) D log Df^q(x)
};

// Local maximum (direction +1) or minimum (-1) of g within half_width of
// guess: golden section in double, then Newton in Real.
template <class Real>
ExtremePoint<Real> locate_extreme(const BlaschkeFamily<Real>& map, std::uint64_t q, const Real& p, const Real& guess,
                                  double half_width, int direction);

// Digit oracles answer sign(m rho - j) (0 for an exact hit, nullopt when the
// computation cannot tell) and full comparisons with a rational.

// Rigid rotation by an exact rational.
class ExactRotation {
 public:
  explicit ExactRotation(Rational rho) : rho_(std::move(rho)) {}
  std::optional<int> sign(const BigInt& m, const BigInt& j);
  Ordering compare(const Rational& pq);
  BigInt integer_hint() const { return rho_.floor(); }
  std::uint64_t budget() const { return UINT64_MAX; }

 private:
  Rational rho_;
};

// Rigid rotation by a high-precision real (e.g. a quadratic irrational).
// Signs within `tolerance` of zero are reported unknown.
class RealRotation {
 public:
  RealRotation(Extended rho, Extended tolerance) : rho_(std::move(rho)), tolerance_(std::move(tolerance)) {}
  std::optional<int> sign(const BigInt& m, const BigInt& j);
  Ordering compare(const Rational& pq);
  BigInt integer_hint() const;
  std::uint64_t budget() const { return UINT64_MAX; }

 private:
  Extended rho_;
  Extended tolerance_;
};

// The orbit of 0 under f_{a,t}, streamed: queries with nondecreasing m cost
// one step each.
template <class Real>
class MapRotation {
 public:
  MapRotation(const BlaschkeFamily<Real>& map, std::uint64_t budget, CompareOptions compare_options = {});
  std::optional<int> sign(const BigInt& m, const BigInt& j);
  Ordering compare(const Rational& pq);
  BigInt integer_hint() const;
  std::uint64_t budget() const { return budget_; }
  std::uint64_t compare_calls() const { return compare_calls_; }

 private:
  const BlaschkeFamily<Real>* map_;
  std::uint64_t budget_;
  CompareOptions compare_options_;
  LiftOrbit<Real> orbit_;
  double min_log_ = 0;  // min_i log Df^i(0) along the streamed orbit
  std::uint64_t compare_calls_ = 0;
};

enum class DigitStatus {
  complete,          // every requested digit emitted and cross-checked
  rational,          // rho is the rational given by the emitted digits
  budget_exhausted,  // the next query needs more iterates than allowed
  inconsistent,      // a convergent landed on the wrong side of rho
};
std::string to_string(DigitStatus status);

struct DigitsResult {
  BigInt integer_part = 0;
  ContinuedFraction cf;  // digits of rho - integer_part
  DigitStatus status = DigitStatus::complete;
  BigInt max_iterate = 0;
};

template <class O>
concept DigitOracle = requires(O& oracle, const BigInt& m, const Rational& pq) {
  { oracle.sign(m, m) } -> std::same_as<std::optional<int>>;
  { oracle.compare(pq) } -> std::same_as<Ordering>;
  { oracle.integer_hint() } -> std::convertible_to<BigInt>;
  { oracle.budget() } -> std::convertible_to<std::uint64_t>;
};

// Digit a_{n+1} is the largest k for which the intermediate fraction
// (p_{n-1} + k p_n)/(q_{n-1} + k q_n) stays on the side of rho where
// p_{n-1}/q_{n-1} lies. Each new convergent is checked with oracle.compare.
template <DigitOracle Oracle>
DigitsResult extract_digits(Oracle& oracle, std::size_t count);

template <class Real>
DigitsResult extract_digits(const BlaschkeFamily<Real>& map, std::size_t count, std::uint64_t budget = 1'000'000,
                            const CompareOptions& compare_options = {});

}  // namespace rotacalc
