#pragma once

// Cross-module property checks with independent oracles. Each check returns
// a named verdict; failures carry the offending inputs.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rotacalc {

struct PropertyResult {
  std::string name;
  bool passed = true;
  std::string detail;  // counts on success, the first counterexample on failure
  double seconds = 0;
};

// Df_{a,0}(x); replaced by a faulty formula to exercise the checks.
using DerivativeFormula = std::function<double(double a, double x)>;
DerivativeFormula closed_form_derivative();
// cos 2 pi x enters with the wrong sign.
DerivativeFormula sign_fault_derivative();

PropertyResult check_determinants(int cfs, int max_len, int max_quotient, std::uint64_t seed);
PropertyResult check_ostrowski(int cfs, int per_cf, std::uint64_t seed);
PropertyResult check_cf_roundtrip(int count, std::uint64_t seed);
PropertyResult check_derivative_fd(const std::vector<double>& as, std::size_t grid,
                                   const DerivativeFormula& formula = closed_form_derivative());
PropertyResult check_derivative_integral(const std::vector<double>& as);
PropertyResult check_derivative_extrema(const std::vector<double>& as);
PropertyResult check_exact_digits(int count, int max_den, std::uint64_t seed);
// Round trip through solve_t; tol < 1e-13 runs in Extended.
PropertyResult check_solve_roundtrip(double a, int targets, int length, double tol, std::uint64_t seed);
PropertyResult check_farey_counting(int windows, int max_n, int max_B, std::uint64_t seed);
PropertyResult check_orbit_deviation(double a, int pairs, std::uint64_t seed);
PropertyResult check_growth_lemma(int sequences, std::uint64_t seed);
PropertyResult check_construction_smoke();

enum class VerifyLevel { quick, full };

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::quick;
  bool inject_derivative_fault = false;
  std::uint64_t seed = 20240601;
};

struct VerifyReport {
  std::vector<PropertyResult> results;
  bool passed() const;
};

VerifyReport run_verify(const VerifyOptions& options,
                        const std::function<void(const PropertyResult&)>& progress = {});

}  // namespace rotacalc
