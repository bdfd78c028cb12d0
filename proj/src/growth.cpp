#include "rotacalc/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rotacalc/parallel.hpp"

namespace rotacalc {

namespace {

constexpr double kGolden = 0.6180339887498949;

double log_df_iterate(const BlaschkeFamily<double>& map, std::uint64_t n, double x) {
  LiftOrbit<double> orbit(map, x);
  orbit.advance(n);
  return orbit.log_derivative();
}

double circle_distance(double d) { return std::abs(d - std::nearbyint(d)); }

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Contiguous ranges of the grid per worker; each worker reduces its range in
// ascending order and the ranges are merged in ascending order.
struct Extremes {
  std::vector<double> max_log, min_log, max_slope;
  std::vector<std::size_t> argmax, argmin;

  explicit Extremes(std::size_t size)
      : max_log(size, -std::numeric_limits<double>::infinity()),
        min_log(size, std::numeric_limits<double>::infinity()),
        max_slope(size, 0),
        argmax(size, 0),
        argmin(size, 0) {}

  void merge(const Extremes& other) {
    for (std::size_t i = 0; i < max_log.size(); ++i) {
      if (other.max_log[i] > max_log[i]) {
        max_log[i] = other.max_log[i];
        argmax[i] = other.argmax[i];
      }
      if (other.min_log[i] < min_log[i]) {
        min_log[i] = other.min_log[i];
        argmin[i] = other.argmin[i];
      }
      max_slope[i] = std::max(max_slope[i], other.max_slope[i]);
    }
  }
};

}  // namespace

NormPoint refine_norm(const BlaschkeFamily<double>& map, std::uint64_t n, double guess, double half_width, int steps,
                      int direction) {
  const double sign = direction >= 0 ? 1.0 : -1.0;
  auto score = [&](double x) { return sign * log_df_iterate(map, n, x); };
  NormPoint best{guess, log_df_iterate(map, n, guess)};
  double best_score = sign * best.log_value;
  double lo = guess - half_width, hi = guess + half_width;
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double f1 = score(x1), f2 = score(x2);
  for (int i = 0; i < steps; ++i) {
    if (f1 > best_score) best_score = f1, best.x = x1;
    if (f2 > best_score) best_score = f2, best.x = x2;
    if (f1 >= f2) {
      hi = x2;
      x2 = x1, f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = score(x1);
    } else {
      lo = x1;
      x1 = x2, f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = score(x2);
    }
  }
  if (f1 > best_score) best_score = f1, best.x = x1;
  if (f2 > best_score) best_score = f2, best.x = x2;
  best.log_value = sign * best_score;
  best.x -= std::floor(best.x);
  return best;
}

GrowthSeries growth_sequence(const BlaschkeFamily<double>& map, std::uint64_t n_max, const GrowthOptions& options) {
  if (!is_power_of_two(options.grid)) throw DomainError("grid must be a power of two");
  if (n_max < options.n_min || options.n_min < 1) throw DomainError("growth_sequence needs 1 <= n_min <= n_max");
  GrowthSeries series;
  const std::uint64_t grid = options.grid;
  if (grid * n_max > options.budget) {
    n_max = options.budget / grid;
    series.truncated = true;
    if (n_max < options.n_min) throw DomainError("iteration budget too small for the requested range");
  }
  const std::uint64_t n_min = options.n_min;
  const std::size_t count = static_cast<std::size_t>(n_max - n_min + 1);
  const double h = 1.0 / static_cast<double>(grid);

  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(worker_count(), grid));
  std::vector<Extremes> partial(chunks, Extremes(count));
  parallel_for(chunks, [&](std::size_t c) {
    Extremes& ex = partial[c];
    const std::size_t begin = grid * c / chunks, end = grid * (c + 1) / chunks;
    for (std::size_t g = begin; g < end; ++g) {
      LiftOrbit<double> orbit(map, static_cast<double>(g) * h, {.track_slope = true});
      for (std::uint64_t n = 1; n <= n_max; ++n) {
        orbit.step();
        if (n < n_min) continue;
        const std::size_t i = static_cast<std::size_t>(n - n_min);
        const double l = orbit.log_derivative();
        if (l > ex.max_log[i]) ex.max_log[i] = l, ex.argmax[i] = g;
        if (l < ex.min_log[i]) ex.min_log[i] = l, ex.argmin[i] = g;
        // |D Df^n| / Df^n; the upper heuristic needs the log slope.
        ex.max_slope[i] = std::max(ex.max_slope[i], std::abs(orbit.slope()) * std::exp(-l));
      }
    }
  });
  for (std::size_t c = 1; c < chunks; ++c) partial[0].merge(partial[c]);
  const Extremes& ex = partial[0];

  series.entries.resize(count);
  parallel_for(count, [&](std::size_t i) {
    const std::uint64_t n = n_min + i;
    GrowthEntry& e = series.entries[i];
    e.n = n;
    NormPoint hi{static_cast<double>(ex.argmax[i]) * h, ex.max_log[i]};
    NormPoint lo{static_cast<double>(ex.argmin[i]) * h, ex.min_log[i]};
    if (options.refine_steps > 0) {
      hi = refine_norm(map, n, hi.x, h, options.refine_steps, +1);
      lo = refine_norm(map, n, lo.x, h, options.refine_steps, -1);
    }
    e.forward = std::exp(hi.log_value);
    e.backward = std::exp(-lo.log_value);
    e.gamma = std::max(e.forward, e.backward);
    e.argmax_forward = hi.x;
    e.argmin_forward = lo.x;
    LiftOrbit<double> image(map, lo.x);
    image.advance(n);
    const double y = image.position();
    e.argmax_backward = y - std::floor(y);
    const double margin = ex.max_slope[i] * h / 2;
    e.upper = std::max({e.gamma, std::exp(ex.max_log[i] + margin), std::exp(-ex.min_log[i] + margin)});
  });
  return series;
}

DenjoyReport denjoy_profile(const BlaschkeFamily<double>& map, const ContinuedFraction& digits, std::size_t depth,
                            const DenjoyOptions& options) {
  if (depth > digits.size()) throw DomainError("denjoy depth exceeds the number of digits");
  if (!is_power_of_two(options.grid)) throw DomainError("grid must be a power of two");
  const ConvergentTable table(digits);
  if (table.q(depth) > options.budget) throw DomainError("q_n exceeds the iteration budget");
  const std::uint64_t q_max = static_cast<std::uint64_t>(table.q(depth));
  std::vector<std::uint64_t> q(depth + 1);
  for (std::size_t k = 0; k <= depth; ++k) q[k] = static_cast<std::uint64_t>(table.q(k));

  // Per grid point and index k: log Df^{q_k}, D log Df^{q_k}, |I_k|.
  const std::size_t grid = options.grid;
  const std::size_t stride = depth + 1;
  std::vector<double> logs(grid * stride), slopes(grid * stride), arcs(grid * stride);
  parallel_for(grid, [&](std::size_t g) {
    const double x = static_cast<double>(g) / static_cast<double>(grid);
    LiftOrbit<double> orbit(map, x, {.track_slope = true});
    std::size_t k = 0;
    for (std::uint64_t m = 1; m <= q_max && k <= depth; ++m) {
      orbit.step();
      while (k <= depth && q[k] == m) {
        logs[g * stride + k] = orbit.log_derivative();
        slopes[g * stride + k] = orbit.slope() * std::exp(-orbit.log_derivative());
        arcs[g * stride + k] = circle_distance(orbit.displacement());
        ++k;
      }
    }
  });

  DenjoyReport report;
  for (std::size_t k = 0; k <= depth; ++k) {
    DenjoyEntry e;
    e.n = k;
    e.q = table.q(k);
    for (std::size_t g = 0; g < grid; ++g) {
      const double prev_arc = k == 0 ? 0.0 : arcs[g * stride + k - 1];
      e.sup_log = std::max(e.sup_log, std::abs(logs[g * stride + k]));
      e.sup_scaled_dlog = std::max(e.sup_scaled_dlog, std::abs(slopes[g * stride + k]) * prev_arc);
      e.max_interval = std::max(e.max_interval, prev_arc);
    }
    e.e_n = std::max(e.sup_log, e.sup_scaled_dlog);
    report.entries.push_back(e);
  }

  std::vector<double> xs, ys;
  for (std::size_t k = depth + 1; k-- > 0 && xs.size() < options.fit_points;) {
    if (report.entries[k].sup_log <= 0) continue;
    xs.insert(xs.begin(), static_cast<double>(k));
    ys.insert(ys.begin(), std::log(report.entries[k].sup_log));
  }
  if (xs.size() >= 2) {
    report.decay_fit = fit_line(xs, ys);
    report.lambda = std::exp(report.decay_fit.slope);
    report.c_fit = std::exp(report.decay_fit.intercept);
  }

  if (options.cross_check_digits) {
    DigitsResult check = extract_digits(map, depth, options.budget);
    const std::size_t common = std::min(check.cf.size(), depth);
    bool agree = check.status != DigitStatus::inconsistent && check.integer_part == 0;
    for (std::size_t i = 1; i <= common && agree; ++i) agree = check.cf.quotient(i) == digits.quotient(i);
    // A shorter rational expansion may still end in [.., b+1] where the
    // target reads [.., b, 1, ...]; only a full-length match counts.
    if (check.status == DigitStatus::complete) agree = agree && common == depth;
    report.digits_consistent = agree;
    report.digits_check = std::move(check);
  }
  return report;
}

std::string to_string(LemmaVerdict verdict) {
  switch (verdict) {
    case LemmaVerdict::log_bounded:
      return "log_bounded";
    case LemmaVerdict::linear_growth:
      return "linear_growth";
    case LemmaVerdict::hypothesis_violated:
      return "hypothesis_violated";
  }
  return "?";
}

SequenceCheck growth_lemma_check(const std::vector<double>& A, double C, const SequenceCheckOptions& options) {
  if (A.size() < 3) throw DomainError("growth_lemma_check needs at least three terms");
  if (A.front() != 0) throw DomainError("growth_lemma_check requires A(0) = 0");
  if (!(C > 0)) throw DomainError("growth_lemma_check requires C > 0");
  SequenceCheck check;
  const double tol_rel = options.relative_tolerance, tol_abs = options.absolute_tolerance;
  for (std::size_t k = 1; k + 1 < A.size(); ++k) {
    const double lhs = 2 * A[k] - A[k - 1] - A[k + 1];
    const double rhs = C * std::exp(-A[k]);
    // Rounding in the second difference scales with the terms, not with rhs.
    const double slack = tol_abs + tol_rel * (std::abs(A[k - 1]) + 2 * std::abs(A[k]) + std::abs(A[k + 1]) + rhs);
    if (lhs - rhs > slack) {
      check.hypothesis_holds = false;
      check.first_violation = k;
      break;
    }
  }
  const double s = std::sqrt(C / 2);
  for (std::size_t k = 1; k < A.size(); ++k) {
    const double bound = 2 * std::log(static_cast<double>(k) * s + 1);
    if (A[k] - bound > tol_abs + tol_rel * (std::abs(A[k]) + bound)) {
      check.log_bound_holds = false;
      check.first_bound_excess = k;
      break;
    }
  }
  const std::size_t n = A.size() - 1;
  const auto tail = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * options.tail_fraction));
  const std::size_t start = std::max<std::size_t>(1, n + 1 - std::max<std::size_t>(1, tail));
  check.tail_slope = std::numeric_limits<double>::infinity();
  for (std::size_t k = start; k <= n; ++k) check.tail_slope = std::min(check.tail_slope, A[k] / static_cast<double>(k));
  check.slope_confirmed = check.tail_slope > options.slope_threshold;

  if (!check.hypothesis_holds) check.verdict = LemmaVerdict::hypothesis_violated;
  else if (check.log_bound_holds) check.verdict = LemmaVerdict::log_bounded;
  else check.verdict = LemmaVerdict::linear_growth;
  return check;
}

ProductTrendRecord theorem1_monitor(const GrowthSeries& series, const DenjoyReport& report, const ConvergentTable& table) {
  ProductTrendRecord rec;
  for (const GrowthEntry& e : series.entries) {
    rec.l.push_back(e.n);
    rec.ratio.push_back(e.gamma / (static_cast<double>(e.n) * static_cast<double>(e.n)));
  }
  // Trend over the last three quarters of the range, in log-log coordinates.
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < rec.l.size(); ++i) {
    if (rec.l[i] * 4 < series.last()) continue;
    lx.push_back(std::log(static_cast<double>(rec.l[i])));
    ly.push_back(std::log(rec.ratio[i]));
  }
  if (lx.size() >= 2) {
    rec.tail_slope = fit_line(lx, ly).slope;
    rec.vanishing = rec.tail_slope < -0.1;
  }

  const std::size_t depth = std::min(report.entries.size(), table.depth() + 1);
  for (std::size_t n = 0; n < depth; ++n) {
    const double e_n = report.entries[n].e_n;
    if (!(e_n > 0)) continue;
    const BigInt& qn = table.q(n);
    const BigInt k_max = n + 1 <= table.depth() ? table.a(n + 1) : BigInt(1);
    for (BigInt k = 1; k <= k_max; ++k) {
      const BigInt l = k * qn;
      if (l > series.last() || l < series.first()) break;
      const double norm = series.at(static_cast<std::uint64_t>(l)).forward;
      const double kd = static_cast<double>(k);
      const double root = std::max(0.0, std::sqrt(norm) - 1) / kd;
      rec.c_fit = std::max(rec.c_fit, 2 * root * root / e_n);
      rec.bounds.push_back({n, static_cast<std::uint64_t>(k), norm, 0});
    }
  }
  for (auto& row : rec.bounds) {
    const double k = static_cast<double>(row.k);
    const double root = std::sqrt(rec.c_fit * report.entries[row.n].e_n / 2);
    row.bound = (root * k + 1) * (root * k + 1);
  }

  std::vector<double> factor;
  for (std::size_t i = 0; i + 1 < depth && i + 1 <= table.depth(); ++i) {
    const double ratio = static_cast<double>(table.q(i)) / static_cast<double>(table.q(i + 1));
    factor.push_back(std::sqrt(rec.c_fit * report.entries[i].e_n / 2) + ratio);
  }
  double product = 1;
  rec.product_bound.push_back(product);
  for (double f : factor) {
    product *= f * f;
    rec.product_bound.push_back(product);
  }
  for (std::size_t i = 0; i + 1 < factor.size(); ++i) rec.pair_factor.push_back(factor[i] * factor[i + 1]);
  for (std::size_t i = rec.pair_factor.size(); i-- > 0;) {
    if (rec.pair_factor[i] > 0.5) break;
    rec.pair_half_from = i;
  }
  return rec;
}

double orbit_deviation_sum(const BlaschkeFamily<double>& first, const BlaschkeFamily<double>& second, double x,
                           std::uint64_t n) {
  if (first.a() != second.a()) throw DomainError("orbit_deviation_sum compares maps with the same a");
  LiftOrbit<double> one(first, x), two(second, x);
  double sum = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    one.step();
    two.step();
    sum += circle_distance(one.displacement() - two.displacement());
  }
  return sum;
}

}  // namespace rotacalc
