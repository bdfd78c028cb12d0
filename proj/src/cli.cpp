#include "rotacalc/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "rotacalc/circle_map.hpp"
#include "rotacalc/construct.hpp"
#include "rotacalc/contfrac.hpp"
#include "rotacalc/growth.hpp"
#include "rotacalc/parallel.hpp"
#include "rotacalc/report.hpp"
#include "rotacalc/rotation.hpp"
#include "rotacalc/solver.hpp"
#include "rotacalc/verify.hpp"

namespace rotacalc {

namespace {

const CLI::Validator kAboveThree(
    [](std::string& s) -> std::string {
      try {
        if (std::stod(s) > 3) return {};
      } catch (...) {
      }
      return "a must be a number > 3, got " + s;
    },
    "A>3");

const CLI::Validator kPowerOfTwo(
    [](std::string& s) -> std::string {
      try {
        const auto v = std::stoull(s);
        if (v != 0 && (v & (v - 1)) == 0) return {};
      } catch (...) {
      }
      return "grid must be a power of two, got " + s;
    },
    "POW2");

const CLI::Validator kPositive(
    [](std::string& s) -> std::string {
      try {
        if (std::stod(s) > 0) return {};
      } catch (...) {
      }
      return "expected a positive number, got " + s;
    },
    "POS");

std::string num(double x) { return csv_number(x); }
template <class Real>
std::string num_real(const Real& x) {
  if constexpr (std::is_same_v<Real, double>) return csv_number(x);
  else return format_real(x, working_digits());
}

// Where a command's table goes: a file (atomically), stdout ("-"), or nowhere.
struct Output {
  std::string csv;
  void add_to(CLI::App* app) { app->add_option("--csv", csv, "write the result table here ('-' for stdout)"); }
  void emit(const CsvTable& table, const std::string& canonical, std::ostream& out) const {
    if (csv.empty()) return;
    if (csv == "-") {
      out << table.body();
      return;
    }
    write_atomic(csv, render_csv(table, make_provenance(canonical)));
  }
};

std::string side_name(PlateauSide s) { return s == PlateauSide::left ? "left" : "right"; }

BlaschkeFamily<double> map_for(double a, std::optional<double> t, const std::string& cf, double tol, double* solved_t) {
  if (t) return BlaschkeFamily<double>(a, *t);
  if (cf.empty()) throw UsageError("either --t or --cf is required");
  const auto s = solve_t<double>(a, ContinuedFraction::parse(cf), std::max(tol, 1e-13));
  if (solved_t) *solved_t = s.t;
  return BlaschkeFamily<double>(a, s.t);
}

ConstructionOptions& bind_construction(CLI::App* app, ConstructionOptions& o) {
  app->add_option("--grid", o.grid, "sup-norm grid")->check(kPowerOfTwo)->capture_default_str();
  app->add_option("--refine-top", o.refine_top, "window entries refined per candidate")->capture_default_str();
  app->add_option("--refine-steps", o.refine_steps)->capture_default_str();
  app->add_option("--safety", o.safety, "theta(q_{n-1}) >= safety * C0")->check(kPositive)->capture_default_str();
  app->add_option("--spacing", o.spacing, "minimum gap between marker positions")->capture_default_str();
  app->add_option("--a-cap", o.a_cap, "largest A tried")->capture_default_str();
  app->add_option("--q-budget", o.q_budget, "largest denominator used")->capture_default_str();
  app->add_option("--c0-range", o.c0_range)->capture_default_str();
  app->add_option("--report-range", o.report_range)->capture_default_str();
  app->add_option("--solve-tol", o.solve_tol)->check(kPositive)->capture_default_str();
  app->add_option("--tie-margin", o.tie_margin)->capture_default_str();
  return o;
}

CsvTable ratio_table(const RatioReport& r) {
  CsvTable t("ratio_report", {"j", "gamma", "theta", "ratio"});
  for (const auto& row : r.rows) t.add({std::to_string(row.j), num(row.gamma), num(row.theta), num(row.ratio)});
  return t;
}

std::string construction_summary(const ConstructionResult& res) {
  const auto& st = res.state;
  const auto& r = res.report;
  SummaryBlock b;
  b.set("a", st.a).set("theta", st.theta).set("stages", std::to_string(st.stages.size())).set("c0", st.c0);
  for (std::size_t m = 0; m < st.stages.size(); ++m) {
    const Stage& s = st.stages[m];
    const std::string k = "stage" + std::to_string(m + 1) + ".";
    b.set(k + "n", std::to_string(s.n)).set(k + "A", std::to_string(s.A)).set(k + "window_q", s.window_q.str());
    b.set(k + "t", s.accepted.t).set(k + "window_max_ratio", s.accepted.max_ratio);
    b.set(k + "open_ended", s.open_ended ? "true" : "false").set(k + "tie", s.tie ? "true" : "false");
    if (s.witness) {
      b.set(k + "witness_j", std::to_string(s.witness->argmax_j)).set(k + "witness_ratio", s.witness->max_ratio);
    }
  }
  b.set("t_infinity", r.t_infinity).set("prefix", r.target.to_string());
  b.set("max_ratio", r.max_ratio).set("argmax_j", std::to_string(r.argmax_j));
  b.set("dlog_sup", r.dlog_sup).set("lower_factor", r.lower_factor);
  if (r.witness_ratio) b.set("witness_ratio_infinity", *r.witness_ratio);
  if (r.orbit_deviation) b.set("orbit_deviation", *r.orbit_deviation);
  b.set("max_upper_ratio", r.max_upper_ratio);
  for (std::size_t m = 0; m < r.perturbation.size(); ++m) {
    b.set("stage" + std::to_string(m + 2) + ".perturbation", r.perturbation[m]);
  }
  if (res.aborted) b.set("aborted", *res.aborted);
  b.set("scope", "certifies the finite prefix only");
  return b.render("construction");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rotation numbers, parameter inversion and growth of derivatives for the Blaschke circle family",
               "rotacalc"};
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "INI file with one [section] per subcommand");
  app.require_subcommand(1);
  app.fallthrough();
  unsigned jobs = 0;
  int precision = 0;
  app.add_option("--jobs", jobs, "worker threads (0: hardware concurrency)");
  app.add_option("--precision", precision, "significant digits of extended reals (>= 15)")
      ->check(CLI::Range(kMinimumDigits, 100000));

  // cf
  auto* cf = app.add_subcommand("cf", "continued fractions");
  std::string cf_expand_text, cf_value, cf_convergents;
  std::size_t cf_terms = 20;
  cf->add_option("--expand", cf_expand_text, "p/q or decimal in (0,1) to expand");
  cf->add_option("--terms", cf_terms)->capture_default_str();
  cf->add_option("--value", cf_value, "quotient list to evaluate");
  cf->add_option("--convergents", cf_convergents, "quotient list whose convergents to tabulate");
  Output cf_out;
  cf_out.add_to(cf);

  // rotnum
  auto* rot = app.add_subcommand("rotnum", "rotation number of f_{a,t}");
  double rot_a = 0;
  std::string rot_t = "0", rot_method = "birkhoff";
  std::uint64_t rot_budget = 1'000'000, rot_orbit = 0;
  std::size_t rot_digits = 10;
  rot->add_option("--a", rot_a)->required()->check(kAboveThree);
  rot->add_option("--t", rot_t)->capture_default_str();
  rot->add_option("--method", rot_method)->check(CLI::IsMember({"birkhoff", "digits"}))->capture_default_str();
  rot->add_option("--budget", rot_budget, "iterations")->capture_default_str();
  rot->add_option("--digits", rot_digits, "digits for --method digits")->capture_default_str();
  rot->add_option("--orbit", rot_orbit, "dump this many iterates of 0 as the table");
  Output rot_out;
  rot_out.add_to(rot);

  // solve-t
  auto* solve = app.add_subcommand("solve-t", "parameter t with a prescribed digit prefix");
  double solve_a = 0, solve_tol = 1e-13;
  std::string solve_cf;
  std::uint64_t solve_budget = 1'000'000;
  solve->add_option("--a", solve_a)->required()->check(kAboveThree);
  solve->add_option("--cf", solve_cf, "target quotients, e.g. 1,1,1,1")->required();
  solve->add_option("--tol", solve_tol)->check(kPositive)->capture_default_str();
  solve->add_option("--budget", solve_budget, "iterates for the digit check")->capture_default_str();
  Output solve_out;
  solve_out.add_to(solve);

  // plateau
  auto* plat = app.add_subcommand("plateau", "mode-locking interval of p/q and its tangency points");
  double plat_a = 0, plat_tol = 1e-13;
  std::string plat_pq;
  plat->add_option("--a", plat_a)->required()->check(kAboveThree);
  plat->add_option("--pq", plat_pq, "p/q")->required();
  plat->add_option("--tol", plat_tol)->check(kPositive)->capture_default_str();
  Output plat_out;
  plat_out.add_to(plat);

  // probe
  auto* probe = app.add_subcommand("probe", "growth of Df^{lq} at a plateau endpoint");
  double probe_a = 0;
  std::string probe_pq, probe_side = "left", probe_theta;
  std::uint64_t probe_lmin = 8, probe_lmax = 64;
  std::optional<double> probe_t, probe_x0;
  ProbeOptions probe_opts;
  probe->add_option("--a", probe_a)->required()->check(kAboveThree);
  probe->add_option("--pq", probe_pq, "p/q")->required();
  probe->add_option("--side", probe_side)->check(CLI::IsMember({"left", "right"}))->capture_default_str();
  probe->add_option("--lmin", probe_lmin)->capture_default_str();
  probe->add_option("--lmax", probe_lmax)->capture_default_str();
  probe->add_option("--grid", probe_opts.grid)->check(kPowerOfTwo)->capture_default_str();
  probe->add_option("--t", probe_t, "probe this parameter instead of the tangency (control runs)");
  probe->add_option("--x0", probe_x0, "centre of the local grid when --t is given");
  probe->add_option("--theta", probe_theta, "compare sup against theta_{lq}");
  Output probe_out;
  probe_out.add_to(probe);

  // growth
  auto* growth = app.add_subcommand("growth", "growth sequence Gamma_n");
  double growth_a = 0;
  std::optional<double> growth_t;
  std::string growth_cf;
  std::uint64_t growth_nmax = 1000;
  GrowthOptions growth_opts;
  growth->add_option("--a", growth_a)->required()->check(kAboveThree);
  growth->add_option("--t", growth_t);
  growth->add_option("--cf", growth_cf, "solve t for this prefix instead of --t");
  growth->add_option("--nmax", growth_nmax)->capture_default_str();
  growth->add_option("--grid", growth_opts.grid)->check(kPowerOfTwo)->capture_default_str();
  growth->add_option("--refine", growth_opts.refine_steps, "golden-section steps (0 disables)")->capture_default_str();
  Output growth_out;
  growth_out.add_to(growth);

  // denjoy
  auto* denjoy = app.add_subcommand("denjoy", "||log Df^{q_n}|| and E_n along the convergents");
  double denjoy_a = 0;
  std::string denjoy_cf;
  std::size_t denjoy_depth = 0;
  DenjoyOptions denjoy_opts;
  denjoy->add_option("--a", denjoy_a)->required()->check(kAboveThree);
  denjoy->add_option("--cf", denjoy_cf, "target quotients")->required();
  denjoy->add_option("--depth", denjoy_depth, "deepest index (default: all digits)");
  denjoy->add_option("--grid", denjoy_opts.grid)->check(kPowerOfTwo)->capture_default_str();
  Output denjoy_out;
  denjoy_out.add_to(denjoy);

  // ostrowski
  auto* ostro = app.add_subcommand("ostrowski", "Ostrowski digits of l");
  std::string ostro_cf, ostro_l;
  ostro->add_option("--cf", ostro_cf)->required();
  ostro->add_option("--l", ostro_l)->required();
  Output ostro_out;
  ostro_out.add_to(ostro);

  // farey
  auto* farey = app.add_subcommand("farey", "Farey intervals, windows and enumeration");
  std::string farey_left, farey_right, farey_prefix, farey_max_den;
  std::string farey_B;
  farey->add_option("--left", farey_left);
  farey->add_option("--right", farey_right);
  farey->add_option("--max-den", farey_max_den, "enumerate rationals with smaller denominators");
  farey->add_option("--prefix", farey_prefix, "odd-length quotient prefix for a window");
  farey->add_option("--B", farey_B, "window parameter");
  Output farey_out;
  farey_out.add_to(farey);

  // construct
  auto* cons = app.add_subcommand("construct", "stage-by-stage construction for a target growth theta_n");
  double cons_a = 0;
  std::string cons_theta, cons_state_out, cons_report;
  std::size_t cons_stages = 1;
  ConstructionOptions cons_opts;
  cons->add_option("--a", cons_a)->required()->check(kAboveThree);
  cons->add_option("--theta", cons_theta, "e.g. n^1.5, 2*n*log(n+2), table:v1,v2,...")->required();
  cons->add_option("--stages", cons_stages)->capture_default_str();
  cons->add_option("--out", cons_state_out, "state file");
  cons->add_option("--report", cons_report, "ratio report CSV");
  bind_construction(cons, cons_opts);

  // resume
  auto* resume = app.add_subcommand("resume", "continue a saved construction");
  std::string resume_state, resume_stages = "+1", resume_out, resume_report;
  resume->add_option("--state", resume_state)->required();
  resume->add_option("--stages", resume_stages, "+k more stages")->capture_default_str();
  resume->add_option("--out", resume_out, "state file (default: overwrite --state)");
  resume->add_option("--report", resume_report, "ratio report CSV");

  // verify
  auto* ver = app.add_subcommand("verify", "cross-module property suite");
  std::string ver_level = "quick", ver_fault;
  ver->add_option("--level", ver_level)->check(CLI::IsMember({"quick", "full"}))->capture_default_str();
  ver->add_option("--inject-fault", ver_fault, "negative control")->check(CLI::IsMember({"derivative-sign"}));
  Output ver_out;
  ver_out.add_to(ver);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "usage: rotacalc [--jobs N] [--precision D] [--config FILE] <subcommand> [options]\n";
    err << "subcommands: cf rotnum solve-t plateau probe growth denjoy ostrowski farey construct resume verify\n";
    return 2;
  }

  try {
    set_working_digits(precision > 0 ? precision : digits_from_environment());
    set_worker_count(jobs);
    CLI::App* sub = app.get_subcommands().front();
    const std::string canonical = sub->get_name() + "\n" + sub->config_to_str(true, false);

    if (sub == cf) {
      if (!cf_expand_text.empty()) {
        const auto e = cf_expand(Rational::parse(cf_expand_text), cf_terms);
        out << e.cf.to_string() << "\n";
        CsvTable t("cf_quotients", {"i", "a_i"});
        for (std::size_t i = 1; i <= e.cf.size(); ++i) t.add({std::to_string(i), e.cf.quotient(i).str()});
        cf_out.emit(t, canonical, out);
      } else if (!cf_value.empty()) {
        out << ContinuedFraction::parse(cf_value).value().to_string() << "\n";
      } else if (!cf_convergents.empty()) {
        const ConvergentTable table(ContinuedFraction::parse(cf_convergents));
        CsvTable t("convergents", {"n", "a_n", "p_n", "q_n"});
        for (std::size_t n = 0; n <= table.depth(); ++n) {
          t.add({std::to_string(n), n == 0 ? "" : table.a(n).str(), table.p(n).str(), table.q(n).str()});
        }
        out << "convergents of [" << table.cf().to_string() << "]: p/q = " << table.convergent(table.depth()).to_string()
            << "\n";
        cf_out.emit(t, canonical, out);
      } else {
        throw UsageError("cf needs one of --expand, --value, --convergents");
      }
    } else if (sub == rot) {
      const BlaschkeFamily<double> map(rot_a, parse_real<double>(rot_t));
      if (rot_method == "birkhoff") {
        const auto e = rotation_birkhoff(map, rot_budget);
        out << "rho = " << num(e.point) << " +- " << num(e.error_bound) << " in [" << e.left.to_string() << ", "
            << e.right.to_string() << "] after " << e.iterations << " iterations\n";
      } else {
        const auto d = extract_digits(map, rot_digits, rot_budget);
        out << "rho = " << d.integer_part.str() << " + [" << d.cf.to_string() << "] (" << to_string(d.status) << ")\n";
      }
      if (rot_orbit > 0) {
        const auto rec = iterate(map, 0.0, static_cast<std::int64_t>(rot_orbit),
                                 static_cast<std::int64_t>(std::max(rot_orbit, rot_budget)));
        CsvTable t("orbit", {"i", "x_i", "log_df_sum"});
        for (std::size_t i = 0; i < rec.points.size(); ++i) {
          t.add({std::to_string(i), num(rec.points[i]), num(rec.log_deriv[i])});
        }
        rot_out.emit(t, canonical, out);
      }
    } else if (sub == solve) {
      const auto target = ContinuedFraction::parse(solve_cf);
      SolveOptions so;
      so.budget = solve_budget;
      CsvTable t("solve_t", {"a", "cf", "t", "t_lo", "t_hi", "bracket_width", "verified_digits", "comparisons"});
      auto report = [&](const auto& s) {
        out << "t = " << num_real(s.t) << " verifies " << s.verified_digits << " of " << target.size()
            << " digits, bracket " << num(s.bracket_width) << "\n";
        t.add({num(solve_a), target.to_string(), num_real(s.t), num_real(s.t_lo), num_real(s.t_hi),
               num(s.bracket_width), std::to_string(s.verified_digits), std::to_string(s.comparisons)});
      };
      const int digits = working_digits_for(solve_tol);
      if (digits == 0) {
        report(solve_t<double>(solve_a, target, solve_tol, so));
      } else {
        if (working_digits() < digits) set_working_digits(digits);
        report(solve_t<Extended>(Extended(solve_a), target, solve_tol, so));
      }
      solve_out.emit(t, canonical, out);
    } else if (sub == plat) {
      const Rational pq = Rational::parse(plat_pq);
      CsvTable t("plateau", {"pq", "side", "t_minus", "t_plus", "width", "t_star", "x0", "g", "df_minus_one",
                             "second_derivative"});
      auto run = [&](auto a) {
        using Real = decltype(a);
        const auto left = tangency_point<Real>(a, pq, plat_tol, PlateauSide::left);
        const auto right = tangency_point<Real>(a, pq, plat_tol, PlateauSide::right);
        const auto& p = left.plateau;
        const Real width = p.t_plus - p.t_minus;
        out << "plateau of " << pq.to_string() << ": [" << num_real(p.t_minus) << ", " << num_real(p.t_plus)
            << "], width " << num_real(width) << "\n";
        for (const auto* w : {&left, &right}) {
          t.add({pq.to_string(), side_name(w == &left ? PlateauSide::left : PlateauSide::right), num_real(p.t_minus),
                 num_real(p.t_plus), num_real(width), num_real(w->t_star), num_real(w->x0), num_real(w->g_value),
                 num(w->derivative_minus_one), num(w->second_derivative)});
        }
      };
      const int digits = working_digits_for(plat_tol);
      if (digits == 0) {
        run(plat_a);
      } else {
        if (working_digits() < digits) set_working_digits(digits);
        run(Extended(plat_a));
      }
      plat_out.emit(t, canonical, out);
    } else if (sub == probe) {
      const Rational pq = Rational::parse(probe_pq);
      const auto q = pq.den().convert_to<std::uint64_t>();
      double t = 0, x0 = 0;
      if (probe_t) {
        t = *probe_t;
        x0 = probe_x0.value_or(0.5);
      } else {
        const auto w = tangency_point<double>(probe_a, pq, 1e-13,
                                              probe_side == "left" ? PlateauSide::left : PlateauSide::right);
        t = w.t_star;
        x0 = w.x0;
      }
      std::vector<double> theta;
      if (!probe_theta.empty()) theta = ThetaSpec::parse(probe_theta).tabulate(probe_lmax * q);
      const auto r = parabolic_growth_probe(BlaschkeFamily<double>(probe_a, t), x0, q, probe_lmin, probe_lmax, theta,
                                            probe_opts);
      out << "t = " << num(t) << " x0 = " << num(x0) << ": log-log slope " << num(r.fit.slope) << " over "
          << r.rows.size() << " rows";
      if (r.exceeds_theta) out << ", exceeds theta: " << (*r.exceeds_theta ? "yes" : "no");
      out << "\n";
      CsvTable tab("probe", {"l", "sup", "argmax", "theta"});
      for (const auto& row : r.rows) {
        tab.add({std::to_string(row.l), num(row.sup), num(row.argmax), row.theta ? num(*row.theta) : ""});
      }
      probe_out.emit(tab, canonical, out);
    } else if (sub == growth) {
      double solved = 0;
      const auto map = map_for(growth_a, growth_t, growth_cf, 1e-13, &solved);
      const auto s = growth_sequence(map, growth_nmax, growth_opts);
      double top = 0;
      std::uint64_t arg = 0;
      CsvTable t("growth", {"n", "gamma", "forward", "backward", "argmax_forward", "argmax_backward", "upper"});
      for (const auto& e : s.entries) {
        if (e.gamma > top) top = e.gamma, arg = e.n;
        t.add({std::to_string(e.n), num(e.gamma), num(e.forward), num(e.backward), num(e.argmax_forward),
               num(e.argmax_backward), num(e.upper)});
      }
      out << "t = " << num(map.t_double()) << ": max Gamma_n = " << num(top) << " at n = " << arg
          << (s.truncated ? " (truncated by budget)" : "") << "\n";
      growth_out.emit(t, canonical, out);
    } else if (sub == denjoy) {
      const auto digits = ContinuedFraction::parse(denjoy_cf);
      const std::size_t depth = denjoy_depth ? denjoy_depth : digits.size();
      double t_solved = 0;
      const auto map = map_for(denjoy_a, std::nullopt, denjoy_cf, 1e-13, &t_solved);
      const auto rep = denjoy_profile(map, digits, depth, denjoy_opts);
      CsvTable t("denjoy", {"n", "q_n", "sup_log", "sup_scaled_dlog", "e_n", "max_interval"});
      for (const auto& e : rep.entries) {
        t.add({std::to_string(e.n), e.q.str(), num(e.sup_log), num(e.sup_scaled_dlog), num(e.e_n),
               num(e.max_interval)});
      }
      out << "t = " << num(t_solved) << ": fitted lambda " << num(rep.lambda) << ", C1 " << num(rep.c_fit)
          << ", digits " << (rep.digits_consistent ? "consistent" : "inconsistent") << "\n";
      denjoy_out.emit(t, canonical, out);
    } else if (sub == ostro) {
      const ConvergentTable table(ContinuedFraction::parse(ostro_cf));
      const BigInt l(ostro_l);
      const auto od = ostrowski_decompose(l, table);
      CsvTable t("ostrowski", {"i", "q_i", "k_i_plus_1", "r_i"});
      std::string sum;
      for (std::size_t i = 0; i <= od.top; ++i) {
        t.add({std::to_string(i), table.q(i).str(), od.digits[i].str(), od.remainders[i].str()});
        if (od.digits[i] != 0) sum += (sum.empty() ? "" : " + ") + od.digits[i].str() + "*" + table.q(i).str();
      }
      out << l.str() << " = " << (sum.empty() ? "0" : sum) << "\n";
      ostro_out.emit(t, canonical, out);
    } else if (sub == farey) {
      Rational left, right;
      if (!farey_prefix.empty()) {
        if (farey_B.empty()) throw UsageError("--prefix needs --B");
        const auto w = farey_window(ContinuedFraction::parse(farey_prefix), BigInt(farey_B));
        out << "window: " << w.beta0.to_string() << " < " << w.beta1.to_string() << " < " << w.beta2.to_string()
            << ", q_beta2 = " << w.q_beta2.str() << "\n";
        left = w.beta0;
        right = w.beta2;
        if (farey_max_den.empty()) farey_max_den = BigInt(2 * w.q_beta2).str();
      } else {
        if (farey_left.empty() || farey_right.empty()) throw UsageError("farey needs --left and --right, or --prefix");
        left = Rational::parse(farey_left);
        right = Rational::parse(farey_right);
        out << "farey: " << (is_farey(left, right) ? "true" : "false") << ", mediant "
            << mediant(left, right).to_string() << "\n";
      }
      if (!farey_max_den.empty()) {
        const auto found = enumerate_rationals(left, right, BigInt(farey_max_den));
        out << found.size() << " rationals with denominator < " << farey_max_den << "\n";
        CsvTable t("farey_enumeration", {"p", "q"});
        for (const auto& x : found) t.add({x.num().str(), x.den().str()});
        farey_out.emit(t, canonical, out);
      }
    } else if (sub == cons) {
      const auto theta = ThetaSpec::parse(cons_theta);
      const auto res = run_construction(cons_a, theta, cons_stages, cons_opts);
      out << construction_summary(res);
      if (!cons_state_out.empty()) write_atomic(cons_state_out, serialize(res.state));
      if (!cons_report.empty()) write_atomic(cons_report, render_csv(ratio_table(res.report), make_provenance(canonical)));
      if (res.aborted) {
        err << "construction stopped: " << *res.aborted << "\n";
        return 1;
      }
    } else if (sub == resume) {
      const auto state = deserialize(read_file(resume_state));
      std::string k = resume_stages;
      if (!k.empty() && k.front() == '+') k.erase(0, 1);
      std::size_t more = 0;
      try {
        more = std::stoull(k);
      } catch (...) {
        throw UsageError("--stages expects +k, got " + resume_stages);
      }
      const auto res = resume_construction(state, more);
      out << construction_summary(res);
      write_atomic(resume_out.empty() ? resume_state : resume_out, serialize(res.state));
      if (!resume_report.empty()) {
        write_atomic(resume_report, render_csv(ratio_table(res.report), make_provenance(canonical)));
      }
      if (res.aborted) {
        err << "construction stopped: " << *res.aborted << "\n";
        return 1;
      }
    } else if (sub == ver) {
      VerifyOptions vo;
      vo.level = ver_level == "full" ? VerifyLevel::full : VerifyLevel::quick;
      vo.inject_derivative_fault = ver_fault == "derivative-sign";
      CsvTable t("verify", {"property", "passed", "seconds", "detail"});
      const auto rep = run_verify(vo, [&](const PropertyResult& r) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << format_real(r.seconds, 3) << " s): " << r.detail
            << "\n";
        out.flush();
      });
      for (const auto& r : rep.results) {
        t.add({r.name, r.passed ? "true" : "false", format_real(r.seconds, 6), r.detail});
      }
      ver_out.emit(t, canonical, out);
      if (!rep.passed()) return 1;
    }
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << e.what() << "\n";
    return 1;
  }
}

}  // namespace rotacalc
