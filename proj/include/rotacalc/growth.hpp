#pragma once

// Measurement of derivative growth: Gamma_n = max(||Df^n||, ||Df^-n||),
// Denjoy quantities at the denominators q_n, the growth-lemma classifier,
// the product-bound monitor and orbit-deviation sums.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rotacalc/circle_map.hpp"
#include "rotacalc/contfrac.hpp"
#include "rotacalc/fit.hpp"
#include "rotacalc/rotation.hpp"

namespace rotacalc {

struct GrowthEntry {
  std::uint64_t n = 0;
  double gamma = 1;          // max(forward, backward)
  double forward = 1;        // ||Df^n||, refined lower estimate
  double backward = 1;       // ||Df^-n|| = 1 / min Df^n
  double argmax_forward = 0;   // x maximizing Df^n
  double argmin_forward = 0;   // x minimizing Df^n
  double argmax_backward = 0;  // y maximizing Df^-n, i.e. f^n(argmin_forward)
  double upper = 1;            // heuristic upper estimate of gamma from the grid slopes
};

struct GrowthSeries {
  std::vector<GrowthEntry> entries;  // consecutive n starting at first()
  bool truncated = false;            // stopped at the iteration budget

  std::uint64_t first() const { return entries.empty() ? 0 : entries.front().n; }
  std::uint64_t last() const { return entries.empty() ? 0 : entries.back().n; }
  bool contains(std::uint64_t n) const { return !entries.empty() && n >= first() && n <= last(); }
  const GrowthEntry& at(std::uint64_t n) const { return entries.at(n - first()); }
};

struct GrowthOptions {
  std::size_t grid = 4096;  // power of two
  int refine_steps = 40;    // golden-section steps per n; 0 disables
  std::uint64_t n_min = 1;  // entries below n_min are iterated but not recorded
  std::uint64_t budget = 4'000'000'000ULL;  // grid * n_max cap
};

// Each grid point contributes one forward orbit of n_max steps. For every n
// the best grid cell of max Df^n and of min Df^n is refined by golden section.
// Df^-n(f^n x) = 1/Df^n(x) turns the minimum into the backward norm.
GrowthSeries growth_sequence(const BlaschkeFamily<double>& map, std::uint64_t n_max, const GrowthOptions& options = {});

struct NormPoint {
  double x = 0;
  double log_value = 0;  // log Df^n(x)
};

// Golden-section search for the max (direction +1) or min (-1) of
// log Df^n on [guess - half_width, guess + half_width]. Never returns a
// worse point than the guess.
NormPoint refine_norm(const BlaschkeFamily<double>& map, std::uint64_t n, double guess, double half_width, int steps,
                      int direction);

struct DenjoyEntry {
  std::size_t n = 0;
  BigInt q;
  double sup_log = 0;         // ||log Df^{q_n}||
  double sup_scaled_dlog = 0; // max_x |D log Df^{q_n}(x)| |I_{n-1}(x)|
  double e_n = 0;             // max of the two
  double max_interval = 0;    // max_x |I_{n-1}(x)|
};

struct DenjoyReport {
  std::vector<DenjoyEntry> entries;  // n = 0..depth
  LineFit decay_fit;                 // log sup_log against n, deepest indices
  double lambda = 0;                 // exp(decay_fit.slope)
  double c_fit = 0;                  // exp(decay_fit.intercept)
  std::optional<DigitsResult> digits_check;
  bool digits_consistent = true;
};

struct DenjoyOptions {
  std::size_t grid = 2048;
  std::size_t fit_points = 5;
  bool cross_check_digits = true;
  std::uint64_t budget = 10'000'000;
};

// One orbit pass per grid point up to q_depth; at each q_k records
// log Df^{q_k}, D log Df^{q_k} and the displacement giving |I_k(x)|, the
// arc between x and f^{q_k}(x). |I_{-1}| = 0.
DenjoyReport denjoy_profile(const BlaschkeFamily<double>& map, const ContinuedFraction& digits, std::size_t depth,
                            const DenjoyOptions& options = {});

enum class LemmaVerdict { log_bounded, linear_growth, hypothesis_violated };
std::string to_string(LemmaVerdict verdict);

struct SequenceCheckOptions {
  double relative_tolerance = 1e-14;  // times the magnitude of the terms involved
  double absolute_tolerance = 0;
  double tail_fraction = 1.0 / 3.0;
  double slope_threshold = 1e-3;
};

// Finite-data classification of the dichotomy for
// 2A(k) - A(k-1) - A(k+1) <= C exp(-A(k)).
struct SequenceCheck {
  LemmaVerdict verdict = LemmaVerdict::log_bounded;
  bool hypothesis_holds = true;
  std::optional<std::size_t> first_violation;  // interior k where it fails
  bool log_bound_holds = true;                 // A(k) <= 2 log(k sqrt(C/2) + 1)
  std::optional<std::size_t> first_bound_excess;
  double tail_slope = 0;                       // min A(k)/k over the tail
  bool slope_confirmed = false;                // tail_slope > threshold
  static constexpr const char* note = "finite-range verdict; the dichotomy itself is a limit statement";
};

SequenceCheck growth_lemma_check(const std::vector<double>& A, double C, const SequenceCheckOptions& options = {});

struct ProductTrendRecord {
  std::vector<std::uint64_t> l;
  std::vector<double> ratio;   // Gamma_l / l^2
  double tail_slope = 0;       // log-log slope of the ratio over the tail
  bool vanishing = false;      // tail_slope < -0.1 or ratio already tiny
  double c_fit = 0;            // smallest C with ||Df^{k q_n}|| <= (sqrt(C E_n / 2) k + 1)^2
  struct BoundRow {
    std::size_t n;
    std::uint64_t k;
    double measured;
    double bound;
  };
  std::vector<BoundRow> bounds;
  std::vector<double> product_bound;  // prod_{i<n} (sqrt(C E_i/2) + q_i/q_{i+1})^2
  std::vector<double> pair_factor;    // consecutive factor pairs
  std::optional<std::size_t> pair_half_from;  // first i from which every pair factor <= 1/2
};

ProductTrendRecord theorem1_monitor(const GrowthSeries& series, const DenjoyReport& report, const ConvergentTable& table);

// sum_{i=1}^{N} of the arc distance between f_1^i(x) and f_2^i(x).
double orbit_deviation_sum(const BlaschkeFamily<double>& first, const BlaschkeFamily<double>& second, double x,
                           std::uint64_t n);

}  // namespace rotacalc
