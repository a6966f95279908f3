#include "aks/frame.hpp"
#include "aks/io.hpp"
#include "aks/periodicity.hpp"
#include "aks/spectral.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace aks;

namespace {

LoopElement element_from_coeffs(int size, const std::map<int, CMatrix>& coeffs,
                                bool real_flag) {
  if (coeffs.empty()) return LoopElement::zero(size, real_flag);
  int lo = coeffs.begin()->first;
  int hi = coeffs.rbegin()->first;
  LoopElement x(size, lo, hi, real_flag);
  for (const auto& [deg, mat] : coeffs) x.set_coeff(deg, mat);
  return x;
}

GridSpec grid_from(const std::vector<double>& origin, const std::vector<double>& spacing,
                   const std::vector<int>& counts) {
  GridSpec g;
  g.origin = origin;
  g.spacing = spacing;
  g.counts = counts;
  return g;
}

py::dict validation_dict(const ValidationReport& report) {
  py::dict out;
  out["all_pass"] = report.all_pass;
  out["max_violation"] = report.max_violation;
  py::dict checks;
  for (const auto& c : report.checks) {
    checks[py::str(c.name)] = py::make_tuple(c.pass, c.magnitude);
  }
  out["checks"] = checks;
  return out;
}

}  // namespace

PYBIND11_MODULE(_aksflow, m) {
  m.doc() = "k-symmetric AKS flows: loop-algebra arithmetic, Lax integration, "
            "adapted frames, spectral invariants and periodicity checks";

  py::enum_<Rule>(m, "Rule")
      .value("ADMISSIBLE", Rule::Admissible)
      .value("SIMPLE", Rule::Simple)
      .value("CURVED_FLAT", Rule::CurvedFlat);

  py::class_<LoopElement>(m, "LoopElement")
      .def(py::init(&element_from_coeffs), py::arg("size"), py::arg("coeffs"),
           py::arg("real") = true)
      .def_property_readonly("size", &LoopElement::size)
      .def_property_readonly("lo", &LoopElement::lo)
      .def_property_readonly("hi", &LoopElement::hi)
      .def_property_readonly("real", &LoopElement::real_flag)
      .def("coeff", &LoopElement::coeff, py::arg("degree"))
      .def("max_abs", &LoopElement::max_abs)
      .def("evaluate", &LoopElement::evaluate, py::arg("z"))
      .def("evaluate_real", &LoopElement::evaluate_real, py::arg("z"))
      .def("__repr__", [](const LoopElement& x) {
        return "<LoopElement m=" + std::to_string(x.size()) + " degrees [" +
               std::to_string(x.lo()) + ", " + std::to_string(x.hi()) + "]>";
      });

  m.def("random_initial", &random_initial, py::arg("n"), py::arg("d"), py::arg("seed"));
  m.def("validate", [](const LoopElement& x) { return validation_dict(validate(x)); });
  m.def("bracket", &bracket);
  m.def("project", &project);
  m.def("complement", &complement);
  m.def("inner_product", &inner_product);
  m.def("distance", &distance);
  m.def("v_field", &v_field, py::arg("x"), py::arg("i"));
  m.def("immersion_det", &immersion_det);
  m.def("serialize", &serialize);
  m.def("parse_loop_element",
        py::overload_cast<const std::string&>(&parse_loop_element));

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init(&grid_from), py::arg("origin"), py::arg("spacing"), py::arg("counts"))
      .def_property_readonly("counts", [](const GridSpec& g) { return g.counts; })
      .def("point", &GridSpec::point)
      .def("total", &GridSpec::total);

  py::class_<FlowResult>(m, "FlowResult")
      .def_property_readonly("grid", [](const FlowResult& f) { return f.grid; })
      .def("sample", [](const FlowResult& f, const std::vector<int>& idx) { return f.at(idx); })
      .def_property_readonly("norm_drift", [](const FlowResult& f) { return f.norm_drift; })
      .def_property_readonly("charpoly_drift",
                             [](const FlowResult& f) { return f.charpoly_drift; });

  m.def(
      "integrate_flow",
      [](const LoopElement& x0, Rule rule, const GridSpec& grid, double h, bool residuals) {
        FlowConfig cfg;
        cfg.rule = rule;
        cfg.h = h;
        cfg.grid = grid;
        cfg.record_residuals = residuals;
        return integrate_flow(x0, cfg);
      },
      py::arg("x0"), py::arg("rule"), py::arg("grid"), py::arg("h") = 1e-3,
      py::arg("residuals") = true);

  py::class_<FrameField>(m, "FrameField")
      .def("frame", [](const FrameField& f, const std::vector<int>& idx) { return f.at(idx); })
      .def_property_readonly("z0", [](const FrameField& f) { return f.z0; })
      .def_property_readonly("max_orth_drift",
                             [](const FrameField& f) { return f.max_orth_drift; })
      .def_property_readonly("max_det_drift",
                             [](const FrameField& f) { return f.max_det_drift; });

  m.def(
      "integrate_frame",
      [](const FlowResult& flow, Rule rule, double z0, double h) {
        return integrate_frame(flow, rule, z0, h);
      },
      py::arg("flow"), py::arg("rule"), py::arg("z0") = 1.0, py::arg("h") = 1e-3);
  m.def("connection_at", &connection_at, py::arg("x"), py::arg("rule"), py::arg("z0"));
  m.def(
      "flatness_residuals",
      [](const FlowResult& flow, Rule rule, double z0) {
        const auto res = flatness_residuals(flow, rule, z0);
        return py::make_tuple(res.max_omega, res.max_eta);
      },
      py::arg("flow"), py::arg("rule"), py::arg("z0") = 1.0);

  m.def("char_poly", [](const LoopElement& x) {
    py::list out;
    for (const auto& c : char_poly(x)) {
      py::list coeffs;
      for (int d = c.lo(); d <= c.hi(); ++d) {
        coeffs.append(py::make_tuple(d, c.coeff(d)));
      }
      out.append(coeffs);
    }
    return out;
  });
  m.def("trace_power_drift", &trace_power_drift);
  m.def("regularity_check",
        [](const LoopElement& x) { return regularity_check(x).summary(); });
  m.def("mu_eigenvalues", [](const LoopElement& x, int i, Complex z) {
    const MuSample s = mu_eigenvalues(x, i, z);
    py::dict out;
    out["ok"] = s.ok;
    out["reason"] = s.reason;
    py::list pairs;
    for (const auto& p : s.pairs) {
      pairs.append(py::make_tuple(p.w, p.mu, p.residual));
    }
    out["pairs"] = pairs;
    return out;
  });

  m.def("solve_conjugator", [](const LoopElement& a, const LoopElement& b) {
    const auto res = solve_conjugator(a, b);
    py::dict out;
    out["B"] = res.B;
    out["residual"] = res.residual;
    out["nullspace_dim"] = res.nullspace_dim;
    out["condition"] = res.condition;
    out["invertible"] = res.invertible;
    return out;
  });
  m.def(
      "detect_period",
      [](const FlowResult& flow, const FrameField& frames, const std::vector<double>& P,
         double tol) {
        const auto report = detect_period(flow, frames, P, tol);
        py::dict out;
        out["kind"] = std::string(period_kind_name(report.kind));
        out["x_residual"] = report.x_residual;
        out["f_residual"] = report.f_residual;
        out["B"] = report.B;
        out["notes"] = report.notes;
        return out;
      },
      py::arg("flow"), py::arg("frames"), py::arg("P"), py::arg("tol") = 1e-6);

  py::class_<CliffordTorus>(m, "CliffordTorus")
      .def(py::init<double, double>(), py::arg("a"), py::arg("b"))
      .def_readonly("a", &CliffordTorus::a)
      .def_readonly("b", &CliffordTorus::b)
      .def("connection", &CliffordTorus::connection, py::arg("direction"))
      .def("frame", &CliffordTorus::frame, py::arg("s1"), py::arg("s2"))
      .def("immersion", &CliffordTorus::immersion, py::arg("s1"), py::arg("s2"))
      .def("killing_field", &CliffordTorus::killing_field);
  m.def("integrate_clifford_frame", &integrate_clifford_frame, py::arg("torus"),
        py::arg("grid"), py::arg("z0") = 1.0, py::arg("h") = 1e-3);
}
