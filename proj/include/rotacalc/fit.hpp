#pragma once

#include <cstddef>
#include <span>

namespace rotacalc {

// Ordinary least squares y = intercept + slope x; residual is the RMS error.
struct LineFit {
  double slope = 0;
  double intercept = 0;
  double residual = 0;
  std::size_t points = 0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace rotacalc
