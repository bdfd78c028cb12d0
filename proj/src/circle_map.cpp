#include "rotacalc/circle_map.hpp"

#include <cmath>

namespace rotacalc {

double dlog_derivative_sup(double a) {
  if (!(a > 3)) throw DomainError("the family requires a > 3");
  const double two_pi = 2 * 3.14159265358979323846;
  auto value = [a, two_pi](double x) {
    return std::abs(dlog_derivative_from_cs(a, std::cos(two_pi * x), std::sin(two_pi * x)));
  };
  constexpr int kGrid = 1 << 16;
  const double h = 1.0 / kGrid;
  int best = 0;
  double best_value = 0;
  for (int i = 0; i < kGrid; ++i) {
    const double v = value(i * h);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double lo = (best - 1) * h, hi = (best + 1) * h;
  const double g = 0.6180339887498949;
  for (int it = 0; it < 60; ++it) {
    const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (value(x1) > value(x2)) hi = x2;
    else lo = x1;
  }
  return std::max(best_value, value((lo + hi) / 2));
}

}  // namespace rotacalc
