#include "rotacalc/contfrac.hpp"

#include <algorithm>
#include <sstream>

#include "rotacalc/errors.hpp"

namespace rotacalc {

namespace {

BigInt gcd_abs(BigInt a, BigInt b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    BigInt r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

BigInt floor_div(const BigInt& num, const BigInt& den) {
  BigInt quotient = num / den;  // truncates toward zero
  if ((num % den != 0) && ((num < 0) != (den < 0))) quotient -= 1;
  return quotient;
}

BigInt parse_integer(std::string_view text) {
  if (text.empty()) throw UsageError("empty integer");
  std::size_t start = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  if (start == text.size()) throw UsageError("not an integer: '" + std::string(text) + "'");
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') {
      throw UsageError("not an integer: '" + std::string(text) + "'");
    }
  }
  BigInt value(std::string(text.substr(start)));
  return text[0] == '-' ? BigInt(-value) : value;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  return text;
}

Rational parse_decimal(std::string_view text) {
  std::string_view mantissa = text;
  long long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = text.substr(0, e);
    std::string_view exp_text = text.substr(e + 1);
    BigInt exp_value = parse_integer(exp_text);
    if (abs(exp_value) > 100000) throw UsageError("exponent out of range: '" + std::string(text) + "'");
    exponent = exp_value.convert_to<long long>();
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
    negative = mantissa[0] == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  long long fraction_digits = 0;
  bool seen_point = false;
  for (char ch : mantissa) {
    if (ch == '.') {
      if (seen_point) throw UsageError("not a number: '" + std::string(text) + "'");
      seen_point = true;
    } else if (ch >= '0' && ch <= '9') {
      digits.push_back(ch);
      if (seen_point) ++fraction_digits;
    } else {
      throw UsageError("not a number: '" + std::string(text) + "'");
    }
  }
  if (digits.empty()) throw UsageError("not a number: '" + std::string(text) + "'");
  BigInt num(digits);
  if (negative) num = -num;
  const long long shift = exponent - fraction_digits;
  BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(shift < 0 ? -shift : shift));
  return shift < 0 ? Rational(num, scale) : Rational(num * scale, 1);
}

}  // namespace

// ---------------------------------------------------------------- Rational

Rational::Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_ == 0) throw DomainError("rational with zero denominator");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  BigInt g = gcd_abs(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

Rational Rational::parse(std::string_view text) {
  text = trim(text);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_integer(trim(text.substr(0, slash)));
    BigInt den = parse_integer(trim(text.substr(slash + 1)));
    if (den == 0) throw UsageError("zero denominator in '" + std::string(text) + "'");
    return Rational(std::move(num), std::move(den));
  }
  return parse_decimal(text);
}

BigInt Rational::floor() const { return floor_div(num_, den_); }

Rational Rational::reciprocal() const {
  if (num_ == 0) throw DomainError("reciprocal of zero");
  return Rational(den_, num_);
}

Rational Rational::abs() const { return Rational(num_ < 0 ? BigInt(-num_) : num_, den_); }

std::string Rational::to_string() const { return num_.str() + "/" + den_.str(); }

double Rational::to_double() const {
  // Scale so both parts fit a double's exponent range before dividing.
  const std::size_t bits_num = num_ == 0 ? 0 : boost::multiprecision::msb(boost::multiprecision::abs(num_));
  const std::size_t bits_den = boost::multiprecision::msb(den_);
  const std::size_t excess = std::max(bits_num, bits_den);
  if (excess < 1000) return num_.convert_to<double>() / den_.convert_to<double>();
  const unsigned shift = static_cast<unsigned>(excess - 900);
  BigInt n = num_ >> shift;
  BigInt d = den_ >> shift;
  if (d == 0) return num_ < 0 ? -HUGE_VAL : HUGE_VAL;
  return n.convert_to<double>() / d.convert_to<double>();
}

Rational operator+(const Rational& x, const Rational& y) {
  return Rational(x.num_ * y.den_ + y.num_ * x.den_, x.den_ * y.den_);
}
Rational operator-(const Rational& x, const Rational& y) {
  return Rational(x.num_ * y.den_ - y.num_ * x.den_, x.den_ * y.den_);
}
Rational operator*(const Rational& x, const Rational& y) {
  return Rational(x.num_ * y.num_, x.den_ * y.den_);
}
Rational operator/(const Rational& x, const Rational& y) {
  if (y.num_ == 0) throw DomainError("division by zero");
  return Rational(x.num_ * y.den_, x.den_ * y.num_);
}

std::strong_ordering operator<=>(const Rational& x, const Rational& y) {
  const BigInt lhs = x.num_ * y.den_;
  const BigInt rhs = y.num_ * x.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

template <>
Rational exact_rational<double>(const double& x) {
  if (!std::isfinite(x)) throw DomainError("non-finite value has no rational form");
  if (x == 0.0) return Rational(0);
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  BigInt num(scaled);
  if (exponent >= 0) return Rational(num << exponent, 1);
  return Rational(num, BigInt(1) << -exponent);
}

template <>
Rational exact_rational<Extended>(const Extended& x) {
  if (!boost::multiprecision::isfinite(x)) throw DomainError("non-finite value has no rational form");
  if (x == 0) return Rational(0);
  int exponent = 0;
  const Extended mantissa = boost::multiprecision::frexp(x, &exponent);
  const long bits = static_cast<long>(mpfr_get_prec(x.backend().data()));
  BigInt num = static_cast<BigInt>(boost::multiprecision::ldexp(mantissa, static_cast<int>(bits)));
  long shift = static_cast<long>(exponent) - bits;
  if (shift >= 0) return Rational(num << shift, 1);
  return Rational(num, BigInt(1) << -shift);
}

// ------------------------------------------------------ ContinuedFraction

ContinuedFraction::ContinuedFraction(std::vector<BigInt> quotients) : quotients_(std::move(quotients)) {
  for (const BigInt& a : quotients_) {
    if (a < 1) throw DomainError("continued fraction quotients must be >= 1");
  }
}

ContinuedFraction::ContinuedFraction(std::initializer_list<long long> quotients) {
  for (long long a : quotients) push_back(BigInt(a));
}

ContinuedFraction ContinuedFraction::parse(std::string_view csv) {
  csv = trim(csv);
  std::vector<BigInt> quotients;
  if (csv.empty() || csv == "[]") return ContinuedFraction();
  if (csv.front() == '[' && csv.back() == ']') csv = csv.substr(1, csv.size() - 2);
  while (true) {
    auto comma = csv.find(',');
    std::string_view item = trim(csv.substr(0, comma));
    BigInt a = parse_integer(item);
    if (a < 1) throw UsageError("continued fraction quotients must be >= 1, got " + a.str());
    quotients.push_back(std::move(a));
    if (comma == std::string_view::npos) break;
    csv.remove_prefix(comma + 1);
  }
  return ContinuedFraction(std::move(quotients));
}

const BigInt& ContinuedFraction::quotient(std::size_t i) const {
  if (i == 0 || i > quotients_.size()) throw DomainError("quotient index out of range");
  return quotients_[i - 1];
}

ContinuedFraction ContinuedFraction::slice(std::size_t i, std::size_t j) const {
  if (i < 1 || i > j || j > quotients_.size()) throw DomainError("slice [i, j] out of range");
  return ContinuedFraction(std::vector<BigInt>(quotients_.begin() + static_cast<std::ptrdiff_t>(i - 1),
                                               quotients_.begin() + static_cast<std::ptrdiff_t>(j)));
}

ContinuedFraction ContinuedFraction::prefix(std::size_t n) const {
  n = std::min(n, quotients_.size());
  return ContinuedFraction(std::vector<BigInt>(quotients_.begin(), quotients_.begin() + static_cast<std::ptrdiff_t>(n)));
}

void ContinuedFraction::push_back(BigInt a) {
  if (a < 1) throw DomainError("continued fraction quotients must be >= 1");
  quotients_.push_back(std::move(a));
}

Rational ContinuedFraction::value() const {
  if (quotients_.empty()) return Rational(0);
  // Evaluate from the tail: x = 1/(a_n), x = 1/(a_{n-1} + x), ...
  BigInt num = 1;
  BigInt den = quotients_.back();
  for (auto it = quotients_.rbegin() + 1; it != quotients_.rend(); ++it) {
    BigInt next_den = *it * den + num;
    num = std::move(den);
    den = std::move(next_den);
  }
  return Rational(num, den);
}

ContinuedFraction ContinuedFraction::canonical() const {
  if (quotients_.size() < 2 || quotients_.back() != 1) return *this;
  std::vector<BigInt> merged(quotients_.begin(), quotients_.end() - 1);
  merged.back() += 1;
  return ContinuedFraction(std::move(merged));
}

std::string ContinuedFraction::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < quotients_.size(); ++i) {
    if (i) out += ',';
    out += quotients_[i].str();
  }
  return out;
}

bool operator==(const ContinuedFraction& x, const ContinuedFraction& y) {
  return x.canonical().quotients_ == y.canonical().quotients_;
}

// ------------------------------------------------------- ConvergentTable

ConvergentTable::ConvergentTable(const ContinuedFraction& cf) : cf_(cf) {
  if (cf.empty()) throw DomainError("convergents of an empty continued fraction");
  p_.reserve(cf.size() + 1);
  q_.reserve(cf.size() + 1);
  p_.push_back(0);
  q_.push_back(1);
  BigInt p_prev = 1;  // p_{-1}
  BigInt q_prev = 0;  // q_{-1}
  for (std::size_t n = 1; n <= cf.size(); ++n) {
    const BigInt& a = cf.quotient(n);
    BigInt p_next = a * p_.back() + p_prev;
    BigInt q_next = a * q_.back() + q_prev;
    p_prev = p_.back();
    q_prev = q_.back();
    p_.push_back(std::move(p_next));
    q_.push_back(std::move(q_next));
  }
}

ConvergentTable convergents(const ContinuedFraction& cf) { return ConvergentTable(cf); }

// ---------------------------------------------------------------- cf_expand

CfExpansion cf_expand(const Rational& x, std::size_t max_terms) {
  if (x.sign() <= 0) throw DomainError("cf_expand requires 0 < x < 1 (non-positive input)");
  if (x >= Rational(1)) throw DomainError("cf_expand requires 0 < x < 1");
  CfExpansion out;
  BigInt num = x.num();
  BigInt den = x.den();
  while (num != 0) {
    if (out.cf.size() == max_terms) {
      out.status = CfStatus::term_limit;
      return out;
    }
    // x = num/den in (0, 1); 1/x = den/num.
    BigInt a = den / num;
    BigInt r = den % num;
    out.cf.push_back(std::move(a));
    den = std::move(num);
    num = std::move(r);
  }
  out.status = CfStatus::exact;
  return out;
}

CfExpansion cf_expand_interval(const Rational& lo, const Rational& hi, std::size_t max_terms) {
  if (lo.sign() <= 0 || hi.sign() <= 0) {
    throw DomainError("cf_expand requires 0 < x < 1 (non-positive input)");
  }
  if (hi >= Rational(1) || lo > hi) throw DomainError("cf_expand requires 0 < lo <= hi < 1");
  if (lo == hi) return cf_expand(lo, max_terms);
  // Cylinders of a fixed prefix are intervals, so the prefix shared by the
  // two endpoints is shared by everything between them.
  CfExpansion out;
  BigInt ln = lo.num(), ld = lo.den(), hn = hi.num(), hd = hi.den();
  while (true) {
    if (out.cf.size() == max_terms) {
      out.status = CfStatus::term_limit;
      return out;
    }
    if (ln == 0 || hn == 0) {
      out.status = CfStatus::precision_exhausted;
      return out;
    }
    BigInt la = ld / ln;
    BigInt ha = hd / hn;
    if (la != ha) {
      out.status = CfStatus::precision_exhausted;
      return out;
    }
    BigInt lr = ld % ln;
    BigInt hr = hd % hn;
    out.cf.push_back(la);
    ld = std::move(ln);
    ln = std::move(lr);
    hd = std::move(hn);
    hn = std::move(hr);
  }
}

template <class Real>
CfExpansion cf_expand(const Real& x, std::size_t max_terms, int significant_digits) {
  const int digits = significant_digits > 0 ? significant_digits : real_digits<Real>();
  const Rational center = exact_rational(x);
  if (center.sign() <= 0) throw DomainError("cf_expand requires 0 < x < 1 (non-positive input)");
  const Rational radius =
      center * Rational(1, boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(digits)));
  Rational lo = center - radius;
  Rational hi = center + radius;
  if (lo.sign() <= 0 || hi >= Rational(1)) {
    if (center >= Rational(1)) throw DomainError("cf_expand requires 0 < x < 1");
    CfExpansion out;
    out.status = CfStatus::precision_exhausted;
    return out;
  }
  return cf_expand_interval(lo, hi, max_terms);
}

template CfExpansion cf_expand<double>(const double&, std::size_t, int);
template CfExpansion cf_expand<Extended>(const Extended&, std::size_t, int);

// ------------------------------------------------------------------ Farey

bool is_farey(const Rational& left, const Rational& right) {
  BigInt det = left.num() * right.den() - right.num() * left.den();
  if (det < 0) det = -det;
  return det == 1;
}

Rational mediant(const Rational& left, const Rational& right) {
  return Rational(left.num() + right.num(), left.den() + right.den());
}

FareyInterval::FareyInterval(Rational left, Rational right) : left_(std::move(left)), right_(std::move(right)) {
  if (!(left_ < right_)) throw DomainError("Farey interval requires left < right");
  if (!is_farey(left_, right_)) {
    throw DomainError("(" + left_.to_string() + ", " + right_.to_string() + ") is not a Farey interval");
  }
}

std::vector<Rational> enumerate_rationals(const Rational& left, const Rational& right, const BigInt& max_den) {
  if (!(left < right)) throw DomainError("enumerate_rationals: empty interval");
  if (max_den < 1) throw DomainError("enumerate_rationals: max_den must be >= 1");
  const BigInt shift = left.floor();
  const Rational lo = left - Rational(shift);
  const Rational hi = right - Rational(shift);

  // In-order walk of the Stern-Brocot tree below (0/1, 1/0), pruned by the
  // interval and by the denominator bound.
  struct Frame {
    BigInt a, b, c, d;  // bounds a/b < node < c/d
    bool expanded;
  };
  std::vector<Rational> out;
  std::vector<Frame> stack;
  stack.push_back({0, 1, 1, 0, false});
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const BigInt mn = frame.a + frame.c;
    const BigInt md = frame.b + frame.d;
    if (md >= max_den) continue;
    // Compare mediant mn/md with the interval without normalising.
    const bool above_lo = mn * lo.den() > lo.num() * md;
    const bool below_hi = mn * hi.den() < hi.num() * md;
    if (frame.expanded) {
      out.emplace_back(mn + shift * md, md);
      continue;
    }
    // Push in reverse of the visiting order: right subtree, node, left subtree.
    if (below_hi) stack.push_back({mn, md, frame.c, frame.d, false});
    if (above_lo && below_hi) stack.push_back({frame.a, frame.b, frame.c, frame.d, true});
    if (above_lo) stack.push_back({frame.a, frame.b, mn, md, false});
  }
  return out;
}

FareyWindow farey_window(const ContinuedFraction& prefix, const BigInt& B) {
  if (prefix.size() % 2 != 1) throw DomainError("farey_window needs an odd-length prefix (2n - 1 quotients)");
  if (B < 1) throw DomainError("farey_window needs B >= 1");
  auto beta = [&](int i) {
    std::vector<BigInt> q = prefix.quotients();
    q.push_back(B + i);
    return ContinuedFraction(std::move(q));
  };
  FareyWindow w;
  w.beta0 = beta(0).value();
  w.beta1 = beta(1).value();
  w.beta2 = beta(2).value();
  w.q_beta2 = w.beta2.den();
  return w;
}

// -------------------------------------------------------------- Ostrowski

OstrowskiDigits ostrowski_decompose(const BigInt& l, const ConvergentTable& table) {
  const std::size_t depth = table.depth();
  if (l < 1 || l >= table.q(depth)) {
    throw DomainError("ostrowski_decompose: l = " + l.str() + " outside the table range [1, " +
                      table.q(depth).str() + ")");
  }
  std::size_t top = 0;
  for (std::size_t n = 0; n < depth; ++n) {
    if (table.q(n) <= l) top = n;
  }
  OstrowskiDigits out;
  out.top = top;
  out.digits.assign(top + 1, BigInt(0));
  out.remainders.assign(top + 2, BigInt(0));
  BigInt r = l;
  out.remainders[top + 1] = r;
  for (std::size_t i = top + 1; i-- > 0;) {
    out.digits[i] = r / table.q(i);
    r = r % table.q(i);
    out.remainders[i] = r;
  }
  return out;
}

// ----------------------------------------------------------- Quotient pattern

QuotientPattern::QuotientPattern(std::vector<Marker> markers) {
  for (auto& marker : markers) append(marker.position, std::move(marker.value));
}

void QuotientPattern::append(std::size_t position, BigInt value) {
  if (position == 0 || position % 2 != 0) throw DomainError("pattern positions must be even and positive");
  if (!markers_.empty() && position <= markers_.back().position) {
    throw DomainError("pattern positions must be strictly increasing");
  }
  if (value < 1) throw DomainError("pattern quotients must be >= 1");
  markers_.push_back({position, std::move(value)});
}

ContinuedFraction pattern_expand(const QuotientPattern& pattern, std::size_t upto,
                                 const std::optional<TerminalOverride>& terminal) {
  if (terminal) {
    if (terminal->position == 0 || terminal->position % 2 != 0) {
      throw DomainError("terminal override position must be even and positive");
    }
    for (const auto& marker : pattern.markers()) {
      if (marker.position == terminal->position) {
        throw DomainError("terminal override conflicts with the marker at position " +
                          std::to_string(marker.position));
      }
    }
    if (terminal->position < pattern.last_position()) {
      throw DomainError("terminal override must lie beyond every marker");
    }
    if (terminal->value < 1) throw DomainError("terminal override quotient must be >= 1");
    if (upto < terminal->position) throw DomainError("upto must reach the terminal override position");
  }
  std::vector<BigInt> quotients(upto, BigInt(1));
  for (const auto& marker : pattern.markers()) {
    if (marker.position <= upto) quotients[marker.position - 1] = marker.value;
  }
  if (terminal) quotients[terminal->position - 1] = terminal->value;
  return ContinuedFraction(std::move(quotients));
}

}  // namespace rotacalc
