#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rotacalc/circle_map.hpp"
#include "rotacalc/construct.hpp"
#include "rotacalc/contfrac.hpp"
#include "rotacalc/growth.hpp"
#include "rotacalc/rotation.hpp"
#include "rotacalc/solver.hpp"
#include "rotacalc/verify.hpp"

namespace py = pybind11;
using namespace rotacalc;

namespace {

// Partial quotients cross the boundary as Python ints via their decimal text.
py::list quotient_list(const ContinuedFraction& cf) {
  py::list out;
  for (const auto& q : cf.quotients()) out.append(py::int_(py::str(q.str())));
  return out;
}

ContinuedFraction to_cf(const std::vector<py::object>& quotients) {
  std::vector<BigInt> q;
  for (const auto& v : quotients) q.emplace_back(py::str(py::handle(v)).cast<std::string>());
  return ContinuedFraction(std::move(q));
}

py::tuple fraction(const Rational& r) {
  return py::make_tuple(py::int_(py::str(r.num().str())), py::int_(py::str(r.den().str())));
}

void check_a(double a) {
  if (!(a > 3)) throw UsageError("a must be > 3");
}

py::dict evaluation_dict(const StageEvaluation& e) {
  py::dict d;
  d["A"] = e.A;
  d["t"] = e.t;
  d["max_ratio"] = e.max_ratio;
  d["argmax_j"] = e.argmax_j;
  d["norm"] = e.norm;
  d["x_star"] = e.x_star;
  d["target"] = quotient_list(e.target);
  return d;
}

py::dict result_dict(const ConstructionResult& r) {
  py::list stages;
  for (const auto& s : r.state.stages) {
    py::dict d;
    d["n"] = s.n;
    d["A"] = s.A;
    d["c0"] = s.c0;
    d["window_q"] = py::int_(py::str(s.window_q.str()));
    d["open_ended"] = s.open_ended;
    d["tie"] = s.tie;
    d["accepted"] = evaluation_dict(s.accepted);
    d["witness"] = s.witness ? py::object(evaluation_dict(*s.witness)) : py::none();
    stages.append(d);
  }
  const RatioReport& rep = r.report;
  py::dict report;
  py::list j, gamma, theta, ratio;
  for (const auto& row : rep.rows) {
    j.append(row.j);
    gamma.append(row.gamma);
    theta.append(row.theta);
    ratio.append(row.ratio);
  }
  report["j"] = j;
  report["gamma"] = gamma;
  report["theta"] = theta;
  report["ratio"] = ratio;
  report["max_ratio"] = rep.max_ratio;
  report["argmax_j"] = rep.argmax_j;
  report["lower_factor"] = rep.lower_factor;
  report["t_infinity"] = rep.t_infinity;
  report["witness_ratio"] = rep.witness_ratio;
  report["orbit_deviation"] = rep.orbit_deviation;
  report["max_upper_ratio"] = rep.max_upper_ratio;
  report["perturbation"] = rep.perturbation;

  py::dict out;
  out["a"] = r.state.a;
  out["theta"] = r.state.theta;
  out["c0"] = r.state.c0;
  out["stages"] = stages;
  out["report"] = report;
  out["aborted"] = r.aborted;
  out["state"] = serialize(r.state);
  return out;
}

ConstructionOptions options_from(const py::dict& kw) {
  ConstructionOptions o;
  for (const auto& [key, value] : kw) {
    const auto k = key.cast<std::string>();
    if (k == "grid") o.grid = value.cast<std::size_t>();
    else if (k == "refine_top") o.refine_top = value.cast<int>();
    else if (k == "refine_steps") o.refine_steps = value.cast<int>();
    else if (k == "safety") o.safety = value.cast<double>();
    else if (k == "spacing") o.spacing = value.cast<std::size_t>();
    else if (k == "a_cap") o.a_cap = value.cast<std::uint64_t>();
    else if (k == "q_budget") o.q_budget = value.cast<std::uint64_t>();
    else if (k == "c0_range") o.c0_range = value.cast<std::uint64_t>();
    else if (k == "report_range") o.report_range = value.cast<std::uint64_t>();
    else if (k == "solve_tol") o.solve_tol = value.cast<double>();
    else if (k == "tie_margin") o.tie_margin = value.cast<double>();
    else throw UsageError("unknown construction option '" + k + "'");
  }
  return o;
}

}  // namespace

PYBIND11_MODULE(_rotacalc, m) {
  m.doc() = "Rotation numbers and derivative growth for the Blaschke family f_{a,t}";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

  m.def(
      "cf_expand",
      [](const std::string& x, std::size_t terms) {
        const auto e = cf_expand(Rational::parse(x), terms);
        return quotient_list(e.cf);
      },
      py::arg("x"), py::arg("terms") = 64,
      "Partial quotients of an exact rational in (0, 1), given as 'p/q' or a decimal string.");

  m.def(
      "cf_value", [](const std::vector<py::object>& q) { return fraction(to_cf(q).value()); }, py::arg("quotients"),
      "(p, q) of [0; a_1, ..., a_n].");

  m.def(
      "convergents",
      [](const std::vector<py::object>& q) {
        const ConvergentTable table(to_cf(q));
        py::list out;
        for (std::size_t n = 0; n <= table.depth(); ++n)
          out.append(py::make_tuple(py::int_(py::str(table.p(n).str())), py::int_(py::str(table.q(n).str()))));
        return out;
      },
      py::arg("quotients"), "[(p_0, q_0), ..., (p_n, q_n)].");

  m.def(
      "derivative", [](double a, double t, double x) { return BlaschkeFamily<double>(a, t).derivative(x); },
      py::arg("a"), py::arg("t"), py::arg("x"));

  m.def(
      "rotation_number",
      [](double a, double t, std::uint64_t iterations) {
        check_a(a);
        py::gil_scoped_release release;
        const auto r = rotation_birkhoff(BlaschkeFamily<double>(a, t), iterations);
        py::gil_scoped_acquire acquire;
        return py::make_tuple(r.point, r.error_bound);
      },
      py::arg("a"), py::arg("t"), py::arg("iterations") = 1'000'000,
      "(estimate, error bound) from lift^n(0)/n.");

  m.def(
      "solve_t",
      [](double a, const std::vector<py::object>& q, double tol) {
        check_a(a);
        const auto cf = to_cf(q);
        SolveResult<double> s;
        {
          py::gil_scoped_release release;
          s = solve_t<double>(a, cf, tol);
        }
        py::dict d;
        d["t"] = s.t;
        d["t_lo"] = s.t_lo;
        d["t_hi"] = s.t_hi;
        d["bracket_width"] = s.bracket_width;
        d["verified_digits"] = s.verified_digits;
        return d;
      },
      py::arg("a"), py::arg("quotients"), py::arg("tol") = 1e-13,
      "A parameter t whose rotation number starts with the given partial quotients.");

  m.def(
      "plateau",
      [](double a, const std::string& pq, double tol) {
        check_a(a);
        const auto r = Rational::parse(pq);
        PlateauInterval<double> p;
        {
          py::gil_scoped_release release;
          p = plateau_endpoints<double>(a, r, tol);
        }
        return py::make_tuple(p.t_minus, p.t_plus);
      },
      py::arg("a"), py::arg("pq"), py::arg("tol") = 1e-13, "(t_minus, t_plus) of the mode-locking interval of p/q.");

  m.def(
      "growth",
      [](double a, double t, std::uint64_t n_max, std::size_t grid, int refine_steps) {
        check_a(a);
        GrowthSeries s;
        {
          py::gil_scoped_release release;
          s = growth_sequence(BlaschkeFamily<double>(a, t), n_max, {.grid = grid, .refine_steps = refine_steps});
        }
        py::dict d;
        std::vector<std::uint64_t> n;
        std::vector<double> gamma, forward, backward;
        for (const auto& e : s.entries) {
          n.push_back(e.n);
          gamma.push_back(e.gamma);
          forward.push_back(e.forward);
          backward.push_back(e.backward);
        }
        d["n"] = n;
        d["gamma"] = gamma;
        d["forward"] = forward;
        d["backward"] = backward;
        d["truncated"] = s.truncated;
        return d;
      },
      py::arg("a"), py::arg("t"), py::arg("n_max"), py::arg("grid") = 4096, py::arg("refine_steps") = 40,
      "Gamma_n = max(||Df^n||, ||Df^-n||) for n = 1..n_max.");

  m.def(
      "construct",
      [](double a, const std::string& theta, std::size_t stages, const py::kwargs& kw) {
        check_a(a);
        const auto spec = ThetaSpec::parse(theta);
        const auto opt = options_from(kw);
        ConstructionResult r;
        {
          py::gil_scoped_release release;
          r = run_construction(a, spec, stages, opt);
        }
        return result_dict(r);
      },
      py::arg("a"), py::arg("theta"), py::arg("stages"),
      "Run the staged construction. Keyword arguments override ConstructionOptions fields.");

  m.def(
      "resume",
      [](const std::string& state, std::size_t stages) {
        const auto s = deserialize(state);
        ConstructionResult r;
        {
          py::gil_scoped_release release;
          r = resume_construction(s, stages);
        }
        return result_dict(r);
      },
      py::arg("state"), py::arg("stages"), "Continue a construction from its serialized state.");

  m.def(
      "verify",
      [](const std::string& level) {
        VerifyOptions o;
        if (level == "quick") o.level = VerifyLevel::quick;
        else if (level == "full") o.level = VerifyLevel::full;
        else throw UsageError("level must be 'quick' or 'full'");
        VerifyReport rep;
        {
          py::gil_scoped_release release;
          rep = run_verify(o);
        }
        py::list out;
        for (const auto& r : rep.results) out.append(py::make_tuple(r.name, r.passed, r.detail));
        return out;
      },
      py::arg("level") = "quick", "[(property, passed, detail), ...].");
}
