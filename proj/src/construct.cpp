#include "rotacalc/construct.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <sstream>

#include "rotacalc/circle_map.hpp"
#include "rotacalc/solver.hpp"

namespace rotacalc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && s[i] == '(') ++depth;
    if (i < s.size() && s[i] == ')') --depth;
    if (i == s.size() || (s[i] == sep && depth == 0)) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

bool is_power_of_two_size(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::uint64_t to_u64(const BigInt& v) { return v.convert_to<std::uint64_t>(); }

// The pattern (plus an optional override) expanded with ones to the shortest
// length >= min_len with q_L >= q_floor, never exceeding q_budget.
ContinuedFraction expand_with_ones(const QuotientPattern& pattern, const std::optional<TerminalOverride>& terminal,
                                   std::size_t min_len, const BigInt& q_floor, const BigInt& q_budget) {
  std::size_t len = std::max<std::size_t>(min_len, 1);
  ContinuedFraction cf = pattern_expand(pattern, len, terminal);
  if (ConvergentTable(cf).q(len) > q_budget) {
    throw DomainError("q_" + std::to_string(len) + " exceeds the denominator budget");
  }
  while (ConvergentTable(cf).q(len) < q_floor) {
    ContinuedFraction longer = cf;
    longer.push_back(1);
    if (ConvergentTable(longer).q(len + 1) > q_budget) break;
    cf = std::move(longer);
    ++len;
  }
  return cf;
}

BlaschkeFamily<double> solved_map(double a, const ContinuedFraction& target, const ConstructionOptions& options,
                                  std::size_t need_digits, double* t_out = nullptr) {
  SolveOptions so;
  const BigInt q_last = ConvergentTable(target).q(target.size());
  so.budget = std::max<std::uint64_t>(so.budget, 8 * to_u64(q_last));
  const auto sol = solve_t<double>(a, target, options.solve_tol, so);
  if (sol.verified_digits < need_digits) {
    throw DomainError("solved parameter verifies only " + std::to_string(sol.verified_digits) + " of " +
                      std::to_string(need_digits) + " digits of " + target.to_string());
  }
  if (t_out) *t_out = sol.t;
  return BlaschkeFamily<double>(a, sol.t);
}

struct Candidate {
  double ratio;
  std::int64_t j;
  double x;
};

}  // namespace

ThetaSpec ThetaSpec::parse(std::string_view text) {
  ThetaSpec spec;
  spec.text_ = trim(text);
  if (spec.text_.empty()) throw UsageError("empty theta specification");
  if (spec.text_.rfind("table:", 0) == 0) {
    std::vector<double> values;
    for (const auto& item : split(std::string_view(spec.text_).substr(6), ',')) {
      values.push_back(parse_real<double>(item));
    }
    ThetaSpec t = table(std::move(values));
    t.text_ = spec.text_;
    return t;
  }
  static const std::regex power(R"(n(?:\^([-+0-9.eE]+))?)");
  static const std::regex logarithm(R"(log\(n(?:\+([0-9.eE]+))?\)(?:\^([-+0-9.eE]+))?)");
  for (const auto& item : split(spec.text_, '*')) {
    std::smatch m;
    if (std::regex_match(item, m, power)) {
      spec.factors_.push_back({Factor::power, m[1].matched ? parse_real<double>(m[1].str()) : 1.0, 0});
    } else if (std::regex_match(item, m, logarithm)) {
      const double offset = m[1].matched ? parse_real<double>(m[1].str()) : 0.0;
      spec.factors_.push_back({Factor::logarithm, m[2].matched ? parse_real<double>(m[2].str()) : 1.0, offset});
    } else {
      try {
        spec.factors_.push_back({Factor::constant, parse_real<double>(item), 0});
      } catch (const UsageError&) {
        throw UsageError("cannot parse theta factor '" + item + "'");
      }
    }
  }
  return spec;
}

ThetaSpec ThetaSpec::table(std::vector<double> values) {
  if (values.empty()) throw UsageError("empty theta table");
  ThetaSpec spec;
  std::ostringstream os;
  os << "table:";
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << format_real(values[i], 17);
  spec.text_ = os.str();
  spec.table_ = std::move(values);
  return spec;
}

double ThetaSpec::operator()(std::uint64_t n) const {
  if (n == 0) throw DomainError("theta is indexed from 1");
  if (!table_.empty()) {
    if (n > table_.size()) throw DomainError("theta table has no entry " + std::to_string(n));
    return table_[n - 1];
  }
  const double x = static_cast<double>(n);
  double v = 1;
  for (const auto& f : factors_) {
    switch (f.kind) {
      case Factor::constant: v *= f.value; break;
      case Factor::power: v *= std::pow(x, f.value); break;
      case Factor::logarithm: v *= std::pow(std::log(x + f.offset), f.value); break;
    }
  }
  return v;
}

void ThetaSpec::validate(std::uint64_t n_max) const {
  double prev = 0;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const double v = (*this)(n);
    if (!(v > 0) || !std::isfinite(v)) throw DomainError("theta_" + std::to_string(n) + " is not positive");
    if (!(v > prev)) throw DomainError("theta is not increasing at n = " + std::to_string(n));
    prev = v;
  }
  const std::uint64_t from = std::max<std::uint64_t>(1, n_max / 2);
  double prev_scaled = std::numeric_limits<double>::infinity();
  for (std::uint64_t n = from; n <= n_max; ++n) {
    const double x = static_cast<double>(n);
    const double scaled = (*this)(n) / (x * x);
    if (scaled > prev_scaled * (1 + 1e-12)) {
      throw DomainError("theta_n / n^2 increases at n = " + std::to_string(n));
    }
    prev_scaled = scaled;
  }
}

std::vector<double> ThetaSpec::tabulate(std::uint64_t n_max) const {
  std::vector<double> out(n_max + 1, 0.0);
  for (std::uint64_t n = 1; n <= n_max; ++n) out[n] = (*this)(n);
  return out;
}

double bounded_type_ceiling(double a, const QuotientPattern& pattern, const ConstructionOptions& options) {
  std::uint64_t range = options.c0_range;
  if (!pattern.markers().empty()) {
    const auto& last = pattern.markers().back();
    const ConvergentTable t(pattern_expand(pattern, last.position));
    range = std::max<std::uint64_t>(range, 4 * to_u64(t.q(last.position)));
  }
  range = std::min<std::uint64_t>(range, options.q_budget);
  const ContinuedFraction cf =
      expand_with_ones(pattern, std::nullopt, pattern.last_position(), BigInt(4 * range), BigInt(4 * options.q_budget));
  const auto map = solved_map(a, cf, options, pattern.last_position());
  GrowthOptions go;
  go.grid = options.grid;
  go.refine_steps = 0;
  const GrowthSeries series = growth_sequence(map, range, go);
  double c0 = 1;
  for (const auto& e : series.entries) c0 = std::max(c0, e.upper);
  return c0;
}

std::size_t choose_next_n(const QuotientPattern& pattern, const ThetaSpec& theta, double c0,
                          const ConstructionOptions& options) {
  const std::size_t last = pattern.last_position();
  std::size_t n = last == 0 ? 2 : last + std::max<std::size_t>(options.spacing, 2);
  if (n % 2) ++n;
  for (;; n += 2) {
    const ConvergentTable t(pattern_expand(pattern, n - 1));
    const BigInt& q = t.q(n - 1);
    if (q > options.q_budget) {
      throw DomainError("no marker position with theta(q_{n-1}) >= safety * C0 fits the denominator budget");
    }
    if (theta(to_u64(q)) >= options.safety * c0) return n;
  }
}

StageEvaluation evaluate_candidate(double a, const QuotientPattern& pattern, std::size_t n, std::uint64_t A,
                                   const ThetaSpec& theta, const ConstructionOptions& options) {
  if (A < 1) throw DomainError("A must be >= 1");
  const TerminalOverride marker{n, BigInt(A)};
  const std::uint64_t q = to_u64(ConvergentTable(pattern_expand(pattern, n - 1)).q(n - 1));
  const std::uint64_t j_max = A * q;
  if (j_max > options.q_budget) throw DomainError("window A q_{n-1} exceeds the denominator budget");

  StageEvaluation ev;
  ev.A = A;
  ev.target = expand_with_ones(pattern, marker, n + 1, BigInt(4 * (A + 1) * q), BigInt(4 * options.q_budget));
  const auto map = solved_map(a, ev.target, options, n, &ev.t);

  GrowthOptions go;
  go.grid = options.grid;
  go.refine_steps = 0;
  go.n_min = q;
  go.budget = std::numeric_limits<std::uint64_t>::max();
  const GrowthSeries series = growth_sequence(map, j_max, go);

  std::vector<Candidate> cands;
  cands.reserve(2 * series.entries.size());
  for (const auto& e : series.entries) {
    const double th = theta(e.n);
    const auto j = static_cast<std::int64_t>(e.n);
    cands.push_back({e.forward / th, j, e.argmax_forward});
    cands.push_back({e.backward / th, -j, e.argmin_forward});
  }
  // Stable order so that ties resolve the same way on every run.
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) { return x.ratio > y.ratio; });
  const std::size_t top = std::min<std::size_t>(cands.size(), static_cast<std::size_t>(std::max(options.refine_top, 1)));
  const double h = 1.0 / static_cast<double>(options.grid);
  ev.max_ratio = -1;
  for (std::size_t i = 0; i < top; ++i) {
    const Candidate& c = cands[i];
    const auto jn = static_cast<std::uint64_t>(std::llabs(c.j));
    const int dir = c.j > 0 ? +1 : -1;
    LiftOrbit<double> orbit(map, c.x);
    orbit.advance(jn);
    double norm = std::exp(dir * orbit.log_derivative());
    double x = c.x;
    if (options.refine_steps > 0) {
      const NormPoint p = refine_norm(map, jn, c.x, h, options.refine_steps, dir);
      norm = std::exp(dir * p.log_value);
      x = p.x;
    }
    const double ratio = norm / theta(jn);
    if (ratio > ev.max_ratio) {
      ev.max_ratio = ratio;
      ev.argmax_j = c.j;
      ev.norm = norm;
      ev.x_star = x;
    }
  }
  return ev;
}

// Monotone in A is assumed: once some A violates, every larger A does too.
// Linear scan to 8, doubling, then bisection on the last pass/fail pair.
Stage select_A(double a, const QuotientPattern& pattern, std::size_t n, const ThetaSpec& theta, double c0,
               const ConstructionOptions& options) {
  Stage st;
  st.n = n;
  st.c0 = c0;
  st.window_q = ConvergentTable(pattern_expand(pattern, n - 1)).q(n - 1);
  const std::uint64_t q = to_u64(st.window_q);
  const std::uint64_t cap = std::min<std::uint64_t>(options.a_cap, options.q_budget / q);
  if (cap < 1) throw DomainError("q_{n-1} exceeds the denominator budget");

  std::optional<StageEvaluation> pass, fail;
  auto eval = [&](std::uint64_t A) {
    st.trail.push_back(evaluate_candidate(a, pattern, n, A, theta, options));
    const StageEvaluation& e = st.trail.back();
    (e.passes() ? pass : fail) = e;
    return e.passes();
  };
  for (std::uint64_t A = 1; A <= std::min<std::uint64_t>(8, cap); ++A) {
    if (!eval(A)) break;
  }
  if (!fail && pass && pass->A < cap) {
    std::uint64_t A = 16;
    for (; A < cap; A *= 2) {
      if (!eval(A)) break;
    }
    if (!fail) eval(cap);
  }
  while (pass && fail && fail->A - pass->A > 1) eval(pass->A + (fail->A - pass->A) / 2);

  if (!pass) {
    st.A = 0;
    st.witness = fail;
    return st;
  }
  st.A = pass->A;
  st.accepted = *pass;
  st.witness = fail;
  st.open_ended = !fail;
  st.tie = pass->max_ratio > 1 - options.tie_margin || (fail && fail->max_ratio < 1 + options.tie_margin);
  return st;
}

namespace {

constexpr int kMaxShifts = 8;

std::optional<std::string> extend(ConstructionState& state, const ThetaSpec& theta, std::size_t more) {
  const ConstructionOptions& opt = state.options;
  for (std::size_t m = 0; m < more; ++m) {
    try {
      const double c0 = state.stages.empty() ? state.c0 : bounded_type_ceiling(state.a, state.pattern, opt);
      std::size_t n = choose_next_n(state.pattern, theta, c0, opt);
      Stage st;
      for (int shift = 0; shift < kMaxShifts; ++shift, n += 2) {
        st = select_A(state.a, state.pattern, n, theta, c0, opt);
        if (st.A > 0) break;
      }
      if (st.A == 0) {
        return "stage " + std::to_string(state.stages.size() + 1) + ": A = 1 violates theta at every tried position";
      }
      state.pattern.append(st.n, BigInt(st.A));
      state.stages.push_back(std::move(st));
    } catch (const DomainError& e) {
      return "stage " + std::to_string(state.stages.size() + 1) + ": " + e.what();
    }
  }
  return std::nullopt;
}

}  // namespace

ConstructionResult run_construction(double a, const ThetaSpec& theta, std::size_t stages,
                                    const ConstructionOptions& options) {
  if (!is_power_of_two_size(options.grid)) throw DomainError("grid must be a power of two");
  theta.validate(options.q_budget);
  ConstructionResult out;
  out.state.a = a;
  out.state.theta = theta.text();
  out.state.options = options;
  out.state.c0 = bounded_type_ceiling(a, {}, options);
  out.aborted = extend(out.state, theta, stages);
  out.report = ratio_report(out.state);
  return out;
}

ConstructionResult resume_construction(const ConstructionState& state, std::size_t more_stages) {
  ConstructionResult out;
  out.state = state;
  const ThetaSpec theta = ThetaSpec::parse(state.theta);
  out.aborted = extend(out.state, theta, more_stages);
  out.report = ratio_report(out.state);
  return out;
}

RatioReport ratio_report(const ConstructionState& state) {
  const ConstructionOptions& opt = state.options;
  const ThetaSpec theta = ThetaSpec::parse(state.theta);
  RatioReport rep;
  rep.dlog_sup = dlog_derivative_sup(state.a);
  rep.lower_factor = std::exp(-7 * rep.dlog_sup);

  const std::uint64_t range = std::min(opt.report_range, opt.q_budget);
  rep.target = expand_with_ones(state.pattern, std::nullopt, state.pattern.last_position(), BigInt(opt.q_budget) + 1,
                                BigInt(4 * opt.q_budget));
  const auto map = solved_map(state.a, rep.target, opt, state.pattern.last_position(), &rep.t_infinity);

  GrowthOptions go;
  go.grid = opt.grid;
  go.refine_steps = 0;
  go.budget = std::numeric_limits<std::uint64_t>::max();
  const GrowthSeries series = growth_sequence(map, range, go);
  for (const auto& e : series.entries) {
    RatioRow row{e.n, e.gamma, theta(e.n), e.gamma / theta(e.n)};
    if (row.ratio > rep.max_ratio) rep.max_ratio = row.ratio, rep.argmax_j = row.j;
    rep.rows.push_back(row);
  }
  if (state.stages.empty()) return rep;

  for (std::size_t m = 0; m + 1 < state.stages.size(); ++m) {
    const Stage& s = state.stages[m];
    const auto q = to_u64(ConvergentTable(s.accepted.target).q(s.n));
    GrowthOptions po = go;
    po.refine_steps = opt.refine_steps;
    const auto one = growth_sequence(BlaschkeFamily<double>(state.a, s.accepted.t), q, po);
    const auto two = growth_sequence(BlaschkeFamily<double>(state.a, state.stages[m + 1].accepted.t), q, po);
    double diff = 0;
    for (std::size_t i = 0; i < one.entries.size(); ++i) {
      diff = std::max({diff, std::abs(one.entries[i].forward - two.entries[i].forward),
                       std::abs(one.entries[i].backward - two.entries[i].backward)});
    }
    rep.perturbation.push_back(diff);
  }

  const Stage& last = state.stages.back();
  if (last.witness) {
    const StageEvaluation& w = *last.witness;
    const auto j = static_cast<std::uint64_t>(std::llabs(w.argmax_j));
    const int dir = w.argmax_j > 0 ? +1 : -1;
    GrowthOptions one = go;
    one.n_min = j;
    one.refine_steps = opt.refine_steps;
    const GrowthEntry e = growth_sequence(map, j, one).entries.back();
    rep.witness_ratio = (dir > 0 ? e.forward : e.backward) / theta(j);
    const BlaschkeFamily<double> witness_map(state.a, w.t);
    rep.orbit_deviation = orbit_deviation_sum(map, witness_map, w.x_star, j);
  }

  // l = c q_{n_m - 1} + r + sum_{i >= n_m} k_{i+1} q_i with digits 0/1 above
  // the marker; the estimate multiplies the upper norms of the pieces.
  const ConvergentTable table(rep.target);
  const std::size_t nm = last.n;
  const BigInt& qm = table.q(nm - 1);
  auto upper = [&](const BigInt& v) { return series.at(to_u64(v)).upper; };
  const std::uint64_t lo = to_u64(qm);
  if (lo > range) return rep;
  const std::uint64_t step = std::max<std::uint64_t>(1, (range - lo) / 2000);
  for (std::uint64_t l = lo; l <= range; l += step) {
    const OstrowskiDigits od = ostrowski_decompose(BigInt(l), table);
    BigInt r = od.top >= nm ? od.remainders[nm] : BigInt(l);
    double estimate = 1;
    bool ok = true;
    for (std::size_t i = nm; i <= od.top; ++i) {
      if (od.digits[i] == 0) continue;
      if (table.q(i) > range) { ok = false; break; }
      for (BigInt k = 0; k < od.digits[i]; ++k) estimate *= upper(table.q(i));
    }
    int c = 0;
    if (r > last.A * qm) r -= qm, c = 1;
    else if (r < qm && r + qm <= BigInt(range) && od.top >= nm) r += qm, c = -1;
    if (!ok || r == 0 || r > BigInt(range)) continue;
    if (c != 0) estimate *= upper(qm);
    estimate *= upper(r);
    const double th = theta(l);
    rep.upper.push_back({l, c, to_u64(r), estimate, th});
    rep.max_upper_ratio = std::max(rep.max_upper_ratio, estimate / th);
  }
  return rep;
}

namespace {

std::string eval_line(const StageEvaluation& e) {
  std::ostringstream os;
  os << e.A << ';' << format_real(e.t, 17) << ';' << format_real(e.max_ratio, 17) << ';' << e.argmax_j << ';'
     << format_real(e.norm, 17) << ';' << format_real(e.x_star, 17) << ';' << e.target.to_string();
  return os.str();
}

StageEvaluation parse_eval(const std::string& text) {
  const auto f = split(text, ';');
  if (f.size() != 7) throw UsageError("malformed evaluation record: " + text);
  StageEvaluation e;
  e.A = std::stoull(f[0]);
  e.t = parse_real<double>(f[1]);
  e.max_ratio = parse_real<double>(f[2]);
  e.argmax_j = std::stoll(f[3]);
  e.norm = parse_real<double>(f[4]);
  e.x_star = parse_real<double>(f[5]);
  std::string cf = f[6];
  cf.erase(std::remove_if(cf.begin(), cf.end(), [](char ch) { return ch == '[' || ch == ']' || ch == ' '; }),
           cf.end());
  e.target = ContinuedFraction::parse(cf);
  return e;
}

}  // namespace

std::string serialize(const ConstructionState& state) {
  const ConstructionOptions& o = state.options;
  std::ostringstream os;
  os << "# rotacalc construction state\n";
  os << "version = " << ConstructionState::kVersion << "\n\n[construction]\n";
  os << "a = " << format_real(state.a, 17) << "\n";
  os << "theta = " << state.theta << "\n";
  os << "c0 = " << format_real(state.c0, 17) << "\n";
  os << "grid = " << o.grid << "\nrefine_top = " << o.refine_top << "\nrefine_steps = " << o.refine_steps << "\n";
  os << "safety = " << format_real(o.safety, 17) << "\nspacing = " << o.spacing << "\n";
  os << "a_cap = " << o.a_cap << "\nq_budget = " << o.q_budget << "\nc0_range = " << o.c0_range << "\n";
  os << "report_range = " << o.report_range << "\nsolve_tol = " << format_real(o.solve_tol, 17) << "\n";
  os << "tie_margin = " << format_real(o.tie_margin, 17) << "\n";
  for (const Stage& s : state.stages) {
    os << "\n[stage]\n";
    os << "n = " << s.n << "\nA = " << s.A << "\nc0 = " << format_real(s.c0, 17) << "\n";
    os << "window_q = " << s.window_q << "\nopen_ended = " << s.open_ended << "\ntie = " << s.tie << "\n";
    os << "accepted = " << eval_line(s.accepted) << "\n";
    if (s.witness) os << "witness = " << eval_line(*s.witness) << "\n";
    for (const auto& e : s.trail) os << "trail = " << eval_line(e) << "\n";
  }
  return os.str();
}

ConstructionState deserialize(std::string_view text) {
  ConstructionState state;
  std::map<std::string, std::string> head;
  std::vector<std::vector<std::pair<std::string, std::string>>> stages;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw UsageError("line " + std::to_string(lineno) + ": bad section header");
      section = s.substr(1, s.size() - 2);
      if (section == "stage") stages.emplace_back();
      else if (section != "construction") throw UsageError("unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (section == "stage") stages.back().emplace_back(std::move(key), std::move(value));
    else head[key] = value;
  }
  auto need = [&](const std::string& key) {
    const auto it = head.find(key);
    if (it == head.end()) throw UsageError("state file lacks '" + key + "'");
    return it->second;
  };
  if (std::stoi(need("version")) != ConstructionState::kVersion) throw UsageError("unsupported state version");
  state.a = parse_real<double>(need("a"));
  state.theta = need("theta");
  state.c0 = parse_real<double>(need("c0"));
  ConstructionOptions& o = state.options;
  o.grid = std::stoull(need("grid"));
  o.refine_top = std::stoi(need("refine_top"));
  o.refine_steps = std::stoi(need("refine_steps"));
  o.safety = parse_real<double>(need("safety"));
  o.spacing = std::stoull(need("spacing"));
  o.a_cap = std::stoull(need("a_cap"));
  o.q_budget = std::stoull(need("q_budget"));
  o.c0_range = std::stoull(need("c0_range"));
  o.report_range = std::stoull(need("report_range"));
  o.solve_tol = parse_real<double>(need("solve_tol"));
  o.tie_margin = parse_real<double>(need("tie_margin"));
  for (const auto& fields : stages) {
    Stage st;
    for (const auto& [k, v] : fields) {
      if (k == "n") st.n = std::stoull(v);
      else if (k == "A") st.A = std::stoull(v);
      else if (k == "c0") st.c0 = parse_real<double>(v);
      else if (k == "window_q") st.window_q = BigInt(v);
      else if (k == "open_ended") st.open_ended = v == "1";
      else if (k == "tie") st.tie = v == "1";
      else if (k == "accepted") st.accepted = parse_eval(v);
      else if (k == "witness") st.witness = parse_eval(v);
      else if (k == "trail") st.trail.push_back(parse_eval(v));
      else throw UsageError("unknown stage key '" + k + "'");
    }
    state.pattern.append(st.n, BigInt(st.A));
    state.stages.push_back(std::move(st));
  }
  return state;
}

}  // namespace rotacalc
