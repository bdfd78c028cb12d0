#pragma once

// Real-number policy. Hardware doubles drive exploratory sweeps; `Extended`
// (MPFR, run-time precision) drives the solver paths whose brackets shrink
// well below 1e-16.

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <type_traits>

namespace rotacalc {

using Extended = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                               boost::multiprecision::et_off>;

inline constexpr int kDefaultDigits = 60;
inline constexpr int kMinimumDigits = 15;

// Significant decimal digits used for newly created Extended values.
void set_working_digits(int digits);
int working_digits();

// Reads ROTACALC_PRECISION; returns `fallback` when unset. Throws UsageError
// on malformed or too-small values.
int digits_from_environment(int fallback = kDefaultDigits);

template <class Real>
inline constexpr bool is_extended_v = std::is_same_v<Real, Extended>;

template <class Real>
double to_double(const Real& x) {
  return static_cast<double>(x);
}

template <class Real>
Real pi_value() {
  if constexpr (std::is_same_v<Real, double>) {
    return 3.14159265358979323846;
  } else {
    return boost::multiprecision::acos(Real(-1));
  }
}

// Unit roundoff of Real at the current working precision.
template <class Real>
Real unit_roundoff() {
  if constexpr (std::is_same_v<Real, double>) {
    return std::numeric_limits<double>::epsilon();
  } else {
    // Boost keeps its own default precision, in decimal digits.
    const int bits = static_cast<int>(std::ceil(Real::default_precision() * 3.3219280948873623));
    return boost::multiprecision::ldexp(Real(1), 1 - bits);
  }
}

// Decimal digits a Real of the current precision carries.
template <class Real>
int real_digits() {
  if constexpr (std::is_same_v<Real, double>) {
    return 16;
  } else {
    return working_digits();
  }
}

// Locale-independent parsing of a decimal literal ("0.25", "-1e-3").
template <class Real>
Real parse_real(std::string_view text);

// Locale-independent formatting with `digits` significant digits.
// digits <= 0 selects the full round-trip precision of the type.
template <class Real>
std::string format_real(const Real& x, int digits = 17);

template <>
double parse_real<double>(std::string_view text);
template <>
Extended parse_real<Extended>(std::string_view text);
template <>
std::string format_real<double>(const double& x, int digits);
template <>
std::string format_real<Extended>(const Extended& x, int digits);

}  // namespace rotacalc
