#pragma once

// Stage-by-stage construction of a rotation number
// alpha_inf = [1, ..., 1, A_1, 1, ..., 1, A_2, ...] (A_k at even positions n_k)
// whose map f_{a,t} has growth sequence tracking a prescribed theta_n.
//
// Stage m picks n_m, then the largest A such that every |j| in
// [q_{n_m-1}, A q_{n_m-1}] has ||Df^j|| < theta_|j| for the map with rotation
// number alpha_m^A, and records the violating j for A + 1.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rotacalc/contfrac.hpp"
#include "rotacalc/growth.hpp"

namespace rotacalc {

// theta_n, n >= 1: a product of factors c, n^s, log(n + k)^r written as
// "n^1.5", "2*n^1.5", "n*log(n+2)", or an explicit "table:v1,v2,...".
class ThetaSpec {
 public:
  static ThetaSpec parse(std::string_view text);
  static ThetaSpec table(std::vector<double> values);

  double operator()(std::uint64_t n) const;
  const std::string& text() const { return text_; }
  // Positive, strictly increasing, and theta_n / n^2 nonincreasing over the
  // second half of [1, n_max]. Throws DomainError naming the first failure.
  void validate(std::uint64_t n_max) const;
  // values[n] = theta_n for n <= n_max; values[0] = 0.
  std::vector<double> tabulate(std::uint64_t n_max) const;

 private:
  struct Factor {
    enum Kind { constant, power, logarithm } kind;
    double value;   // constant value or exponent
    double offset;  // log(n + offset)
  };
  std::string text_;
  std::vector<Factor> factors_;
  std::vector<double> table_;
};

struct ConstructionOptions {
  std::size_t grid = 1024;             // sup-norm grid (power of two)
  int refine_top = 8;                  // window entries refined per evaluation
  int refine_steps = 40;
  double safety = 2;                   // theta(q_{n-1}) >= safety * C_0
  std::size_t spacing = 2;             // n_{m+1} - n_m >= spacing
  std::uint64_t a_cap = 1'000'000;     // largest A tried
  std::uint64_t q_budget = 100'000;    // largest denominator used
  std::uint64_t c0_range = 2000;       // j range for the bounded-type ceiling C_0
  std::uint64_t report_range = 20000;  // j range of the final ratio report
  double solve_tol = 1e-13;
  double tie_margin = 1e-3;            // |ratio - 1| below this is flagged
};

struct StageEvaluation {
  std::uint64_t A = 0;
  double t = 0;
  ContinuedFraction target;
  double max_ratio = 0;     // max over the window of Gamma_|j| / theta_|j|
  std::int64_t argmax_j = 0;  // signed: negative for the backward norm
  double norm = 0;           // the norm at argmax_j
  double x_star = 0;         // where the norm is attained
  bool passes() const { return max_ratio < 1; }
};

struct Stage {
  std::size_t n = 0;          // marker position n_m
  std::uint64_t A = 0;        // A_m
  double c0 = 0;              // ceiling measured before the stage
  BigInt window_q;            // q_{n_m - 1}
  bool open_ended = false;    // no violation found up to the cap
  bool tie = false;           // decision within tie_margin of 1
  StageEvaluation accepted;   // alpha_m = alpha_m^{A_m}
  std::optional<StageEvaluation> witness;  // alpha_m^{A_m + 1} and j_m
  std::vector<StageEvaluation> trail;      // every A evaluated, in order
};

struct ConstructionState {
  static constexpr int kVersion = 1;
  double a = 0;
  std::string theta;
  ConstructionOptions options;
  double c0 = 0;  // golden-family ceiling
  QuotientPattern pattern;
  std::vector<Stage> stages;
};

struct RatioRow {
  std::uint64_t j = 0;
  double gamma = 0;
  double theta = 0;
  double ratio = 0;
};

struct UpperBoundRow {
  std::uint64_t l = 0;
  int c = 0;             // coefficient of q_{n_m - 1}
  std::uint64_t r = 0;   // q_{n_m-1} <= r <= A_m q_{n_m-1}
  double estimate = 0;   // product of the norms in the decomposition
  double theta = 0;
};

struct RatioReport {
  std::vector<RatioRow> rows;  // the alpha_inf prefix map, j = 1..report_range
  double max_ratio = 0;
  std::uint64_t argmax_j = 0;
  double dlog_sup = 0;         // ||D log Df_0||
  double lower_factor = 1;     // exp(-7 ||D log Df_0||)
  double t_infinity = 0;       // solved parameter of the alpha_inf prefix
  ContinuedFraction target;
  // At the last stage's witness j_m, when there is one.
  std::optional<double> witness_ratio;      // ||Df^{j_m}_{alpha_inf}|| / theta_{j_m}
  std::optional<double> orbit_deviation;    // sum of the orbit distances, alpha_inf vs alpha_m^{A_m+1}
  std::vector<UpperBoundRow> upper;
  double max_upper_ratio = 0;
  // perturbation[m] = max over j <= q_{n_m} of |Gamma_j| differences between
  // the solved maps of stages m and m + 1 (forward and backward norms).
  std::vector<double> perturbation;
};

struct ConstructionResult {
  ConstructionState state;
  RatioReport report;
  std::optional<std::string> aborted;  // why the last requested stage was not built
};

// Measured ceiling of sup_j Gamma_j over 1 <= j <= range for the map with
// rotation number given by `pattern` followed by ones.
double bounded_type_ceiling(double a, const QuotientPattern& pattern, const ConstructionOptions& options);

// Smallest even n > last marker (+ spacing) with theta(q_{n-1}) >= safety c0,
// q taken from the pattern followed by ones.
std::size_t choose_next_n(const QuotientPattern& pattern, const ThetaSpec& theta, double c0,
                          const ConstructionOptions& options);

// Solves alpha^A (A at position n after the pattern, ones beyond) and
// measures the window q_{n-1} <= |j| <= A q_{n-1}.
StageEvaluation evaluate_candidate(double a, const QuotientPattern& pattern, std::size_t n, std::uint64_t A,
                                   const ThetaSpec& theta, const ConstructionOptions& options);

Stage select_A(double a, const QuotientPattern& pattern, std::size_t n, const ThetaSpec& theta, double c0,
               const ConstructionOptions& options);

ConstructionResult run_construction(double a, const ThetaSpec& theta, std::size_t stages,
                                    const ConstructionOptions& options = {});
ConstructionResult resume_construction(const ConstructionState& state, std::size_t more_stages);
RatioReport ratio_report(const ConstructionState& state);

std::string serialize(const ConstructionState& state);
ConstructionState deserialize(std::string_view text);

}  // namespace rotacalc
