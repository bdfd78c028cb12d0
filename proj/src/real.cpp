#include "rotacalc/real.hpp"

#include <charconv>
#include <cstdlib>

#include "rotacalc/errors.hpp"

namespace rotacalc {

namespace {
int g_digits = kDefaultDigits;
bool g_applied = false;

void apply_digits() {
  Extended::default_precision(static_cast<unsigned>(g_digits));
  g_applied = true;
}

bool looks_numeric(std::string_view text) {
  if (text.empty()) return false;
  bool digit = false;
  for (char ch : text) {
    if (ch >= '0' && ch <= '9') {
      digit = true;
    } else if (ch != '+' && ch != '-' && ch != '.' && ch != 'e' && ch != 'E') {
      return false;
    }
  }
  return digit;
}
}  // namespace

void set_working_digits(int digits) {
  if (digits < kMinimumDigits) {
    throw UsageError("precision must be at least " + std::to_string(kMinimumDigits) +
                     " significant digits");
  }
  g_digits = digits;
  apply_digits();
}

int working_digits() {
  if (!g_applied) apply_digits();
  return g_digits;
}

int digits_from_environment(int fallback) {
  const char* raw = std::getenv("ROTACALC_PRECISION");
  if (raw == nullptr || *raw == '\0') return fallback;
  std::string_view text(raw);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("ROTACALC_PRECISION must be an integer, got '" + std::string(text) + "'");
  }
  if (value < kMinimumDigits) {
    throw UsageError("ROTACALC_PRECISION must be at least " + std::to_string(kMinimumDigits));
  }
  return value;
}

template <>
double parse_real<double>(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw UsageError("not a real number: '" + std::string(text) + "'");
  }
  return value;
}

template <>
Extended parse_real<Extended>(std::string_view text) {
  if (!looks_numeric(text)) {
    throw UsageError("not a real number: '" + std::string(text) + "'");
  }
  working_digits();
  try {
    return Extended(std::string(text));
  } catch (const std::exception&) {
    throw UsageError("not a real number: '" + std::string(text) + "'");
  }
}

template <>
std::string format_real<double>(const double& x, int digits) {
  char buffer[64];
  const int precision = digits <= 0 ? 17 : digits;
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), x, std::chars_format::general,
                                 precision);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

template <>
std::string format_real<Extended>(const Extended& x, int digits) {
  const int precision = digits <= 0 ? working_digits() + 5 : digits;
  return x.str(precision, std::ios_base::fmtflags(0));
}

}  // namespace rotacalc
