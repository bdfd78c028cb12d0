#pragma once

// Inversion of t -> rho(f_{a,t}): parameters for a prescribed digit prefix,
// mode-locking plateaus, their tangency points and the growth of Df^{lq}
// there.
//
// Real selects the arithmetic. working_digits_for(tol) tells which one a
// tolerance needs; the solvers never change the working precision.

#include <cstdint>
#include <optional>
#include <vector>

#include "rotacalc/circle_map.hpp"
#include "rotacalc/contfrac.hpp"
#include "rotacalc/fit.hpp"
#include "rotacalc/rotation.hpp"

namespace rotacalc {

// 0 when double suffices for a t-tolerance, otherwise the Extended digits.
int working_digits_for(double tol);

template <class Real>
struct PlateauInterval {
  Rational pq;
  Real t_minus = 0;  // leftmost locked parameter found
  Real t_plus = 0;   // rightmost locked parameter found
  Real t_locked = 0; // the parameter where 0 is a periodic point
  double residual_minus = 0;  // width of the final bisection bracket
  double residual_plus = 0;
  int uncertified = 0;        // comparisons decided without a certificate
};

// Bisection on locked / not locked, seeded by the parameter where 0 itself
// is periodic. |lift(x) - x - t| <= asin(1/a)/pi brackets the plateau.
template <class Real>
PlateauInterval<Real> plateau_endpoints(const Real& a, const Rational& pq, double tol,
                                        const CompareOptions& options = {});

struct SolveOptions {
  std::uint64_t budget = 1'000'000;  // iterates for the digit check
  CompareOptions compare;
  bool verify = true;
};

template <class Real>
struct SolveResult {
  Real t = 0;           // a parameter whose rotation number has the target prefix
  Real t_lo = 0, t_hi = 0;  // final bracket; t is its endpoint inside the target set
  ContinuedFraction target;
  double bracket_width = 0;
  std::size_t verified_digits = 0;
  std::optional<DigitsResult> digits;
  std::size_t comparisons = 0;
  int uncertified = 0;
};

// The parameters whose rotation number lies strictly between the last two
// convergents of the target form an interval of t. Bisection finds a point of
// it, then walks to the end that touches the plateau of the last convergent,
// so rho(t) = [target, N, ...] with N large.
template <class Real>
SolveResult<Real> solve_t(const Real& a, const ContinuedFraction& target, double tol,
                          const SolveOptions& options = {});

enum class PlateauSide { left, right };

template <class Real>
struct TangencyWitness {
  Real t_star = 0;
  Real x0 = 0;
  Rational pq;
  Real g_value = 0;                 // lift^q(x0) - x0 - p
  double derivative_minus_one = 0;  // Df^q(x0) - 1
  double second_deriv_proxy = 0;    // central second difference of g at x0
  double second_derivative = 0;     // Df^q D log Df^q at x0
  double step = 0;                  // the difference step
  bool flat = false;                // second difference below its noise floor
  PlateauInterval<Real> plateau;
};

// At the left end f^q touches the identity from below: x0 maximizes g. At the
// right end it touches from above and x0 minimizes g.
template <class Real>
TangencyWitness<Real> tangency_point(const Real& a, const Rational& pq, double tol, PlateauSide side = PlateauSide::left,
                                     const CompareOptions& options = {});

struct ProbeOptions {
  std::size_t grid = 8192;
  int refine_steps = 40;
  std::size_t local_grid = 2048;  // extra nodes within local_width of x0
  double local_width = 1.0 / 64;
  std::uint64_t budget = 2'000'000'000ULL;
};

struct ProbeRow {
  std::uint64_t l = 0;
  double sup = 0;     // sup_x Df^{lq}(x)
  double argmax = 0;
  std::optional<double> theta;  // theta_{lq} when a table was supplied
};

struct ProbeResult {
  std::vector<ProbeRow> rows;
  LineFit fit;                  // log sup against log l
  std::size_t truncated = 0;    // indices dropped for overflow or budget
  std::optional<bool> exceeds_theta;  // sup > theta at every row with a theta
};

// theta[n] = theta_n; may be empty. Rows with l q < theta.size() are compared.
ProbeResult parabolic_growth_probe(const BlaschkeFamily<double>& map, double x0, std::uint64_t q, std::uint64_t l_min,
                                   std::uint64_t l_max, const std::vector<double>& theta = {},
                                   const ProbeOptions& options = {});

}  // namespace rotacalc
