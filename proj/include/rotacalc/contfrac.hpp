#pragma once

// Exact continued-fraction arithmetic: rationals, expansions, convergent
// tables, Farey intervals, Ostrowski numeration and quotient patterns.
// Every integer is arbitrary precision.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rotacalc/real.hpp"

namespace rotacalc {

using BigInt = boost::multiprecision::cpp_int;

// Reduced fraction num/den with den >= 1.
class Rational {
 public:
  Rational() = default;
  Rational(BigInt num, BigInt den = 1);  // NOLINT(google-explicit-constructor)
  Rational(long long value) : num_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(int value) : num_(value) {}  // NOLINT(google-explicit-constructor)

  // Accepts "p/q", an integer, or a finite decimal ("0.7", "-1.25e-3").
  // Decimals are converted exactly.
  static Rational parse(std::string_view text);

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }

  BigInt floor() const;
  Rational reciprocal() const;
  Rational abs() const;
  int sign() const { return num_.sign(); }
  bool is_integer() const { return den_ == 1; }

  std::string to_string() const;

  template <class Real>
  Real to_real() const {
    if constexpr (std::is_same_v<Real, double>) {
      return to_double();
    } else {
      working_digits();
      return Real(num_) / Real(den_);
    }
  }
  double to_double() const;

  friend Rational operator+(const Rational& x, const Rational& y);
  friend Rational operator-(const Rational& x, const Rational& y);
  friend Rational operator*(const Rational& x, const Rational& y);
  friend Rational operator/(const Rational& x, const Rational& y);
  Rational operator-() const { return Rational(-num_, den_); }

  friend bool operator==(const Rational& x, const Rational& y) {
    return x.num_ == y.num_ && x.den_ == y.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& x, const Rational& y);

 private:
  BigInt num_ = 0;
  BigInt den_ = 1;
};

// The exact binary value of a finite floating-point number.
template <class Real>
Rational exact_rational(const Real& x);

// Finite continued fraction [a_1, ..., a_n] = 1/(a_1 + 1/(a_2 + ...)),
// every a_i >= 1. The empty expansion has value 0.
//
// [b_1,...,b_n + 1] and [b_1,...,b_n,1] are different quotient lists with
// the same value; canonical() prefers the former (except for "[1]"), and
// operator== compares canonical forms.
class ContinuedFraction {
 public:
  ContinuedFraction() = default;
  explicit ContinuedFraction(std::vector<BigInt> quotients);
  ContinuedFraction(std::initializer_list<long long> quotients);

  // Comma-separated list, e.g. "1,1,7,1".
  static ContinuedFraction parse(std::string_view csv);

  const std::vector<BigInt>& quotients() const { return quotients_; }
  std::size_t size() const { return quotients_.size(); }
  bool empty() const { return quotients_.empty(); }

  // a_i with the 1-based index used throughout the theory.
  const BigInt& quotient(std::size_t i) const;

  // alpha|[i, j] = [a_i, ..., a_j], 1-based and inclusive.
  ContinuedFraction slice(std::size_t i, std::size_t j) const;
  ContinuedFraction prefix(std::size_t n) const;

  void push_back(BigInt a);

  Rational value() const;
  ContinuedFraction canonical() const;
  std::string to_string() const;

  friend bool operator==(const ContinuedFraction& x, const ContinuedFraction& y);

 private:
  std::vector<BigInt> quotients_;
};

// Convergents p_n/q_n, n = 0..N, for a cf of N quotients:
// p_0 = 0, q_0 = 1, p_1 = 1, q_1 = a_1, and
// p_{n+1} = a_{n+1} p_n + p_{n-1}, q_{n+1} = a_{n+1} q_n + q_{n-1}.
class ConvergentTable {
 public:
  explicit ConvergentTable(const ContinuedFraction& cf);

  std::size_t depth() const { return cf_.size(); }
  const ContinuedFraction& cf() const { return cf_; }
  const BigInt& p(std::size_t n) const { return p_.at(n); }
  const BigInt& q(std::size_t n) const { return q_.at(n); }
  const BigInt& a(std::size_t n) const { return cf_.quotient(n); }
  Rational convergent(std::size_t n) const { return Rational(p_.at(n), q_.at(n)); }

 private:
  ContinuedFraction cf_;
  std::vector<BigInt> p_;
  std::vector<BigInt> q_;
};

ConvergentTable convergents(const ContinuedFraction& cf);

enum class CfStatus {
  exact,                // the input is rational and fully expanded
  term_limit,           // max_terms certified digits emitted
  precision_exhausted,  // the next digit is not determined by the input
};

struct CfExpansion {
  ContinuedFraction cf;
  CfStatus status = CfStatus::exact;
};

// Expansion of an exact rational in (0, 1).
CfExpansion cf_expand(const Rational& x, std::size_t max_terms);

// Digits shared by every number of the closed interval [lo, hi] in (0, 1).
CfExpansion cf_expand_interval(const Rational& lo, const Rational& hi, std::size_t max_terms);

// Certified expansion of a real known to `significant_digits` relative
// accuracy: the digits common to the whole uncertainty interval.
// significant_digits <= 0 uses the full precision of Real.
template <class Real>
CfExpansion cf_expand(const Real& x, std::size_t max_terms, int significant_digits = 0);

// Interval between two rationals. Farey when |p q' - p' q| = 1.
class FareyInterval {
 public:
  FareyInterval(Rational left, Rational right);  // requires left < right and Farey
  const Rational& left() const { return left_; }
  const Rational& right() const { return right_; }

 private:
  Rational left_;
  Rational right_;
};

bool is_farey(const Rational& left, const Rational& right);
Rational mediant(const Rational& left, const Rational& right);

// Reduced fractions strictly inside (left, right) with denominator < max_den,
// ascending, found by Stern-Brocot descent.
std::vector<Rational> enumerate_rationals(const Rational& left, const Rational& right,
                                          const BigInt& max_den);

// The three rationals beta_i = [b_1, ..., b_{2n-1}, B + i], i = 0, 1, 2,
// sharing a prefix of 2n - 1 quotients. beta_0 < beta_1 < beta_2 and both
// (beta_0, beta_1) and (beta_1, beta_2) are Farey intervals.
struct FareyWindow {
  Rational beta0, beta1, beta2;
  BigInt q_beta2;  // q_{2n}(beta_2)
};

FareyWindow farey_window(const ContinuedFraction& prefix, const BigInt& B);

// Greedy expansion l = sum_{i=0}^{n} k_{i+1} q_i for q_n <= l < q_{n+1}:
// r_{n+1} = l, r_{i+1} = k_{i+1} q_i + r_i, 0 <= r_i < q_i.
struct OstrowskiDigits {
  std::size_t top = 0;               // n
  std::vector<BigInt> digits;        // digits[i] = k_{i+1}, paired with q_i
  std::vector<BigInt> remainders;    // remainders[i] = r_i, i = 0..n+1
};

OstrowskiDigits ostrowski_decompose(const BigInt& l, const ConvergentTable& table);

// Positions n_k (even, strictly increasing) carrying quotient A_k; every
// other position carries 1.
class QuotientPattern {
 public:
  struct Marker {
    std::size_t position;
    BigInt value;
    friend bool operator==(const Marker&, const Marker&) = default;
  };

  QuotientPattern() = default;
  explicit QuotientPattern(std::vector<Marker> markers);

  const std::vector<Marker>& markers() const { return markers_; }
  std::size_t last_position() const { return markers_.empty() ? 0 : markers_.back().position; }
  void append(std::size_t position, BigInt value);

  friend bool operator==(const QuotientPattern&, const QuotientPattern&) = default;

 private:
  std::vector<Marker> markers_;
};

struct TerminalOverride {
  std::size_t position;
  BigInt value;
};

// [a_1, ..., a_upto] for the pattern, optionally with one more marker at an
// even position beyond all existing ones (the alpha_m^A construction).
ContinuedFraction pattern_expand(const QuotientPattern& pattern, std::size_t upto,
                                 const std::optional<TerminalOverride>& terminal = std::nullopt);

}  // namespace rotacalc
