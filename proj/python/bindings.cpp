#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mcpert/cli.hpp"
#include "mcpert/ctmc_bounds.hpp"
#include "mcpert/dtmc_bounds.hpp"
#include "mcpert/errors.hpp"
#include "mcpert/gallery.hpp"
#include "mcpert/norms.hpp"
#include "mcpert/solvers.hpp"
#include "mcpert/verify.hpp"

namespace py = pybind11;
using namespace mcpert;

namespace {

py::dict details_of(const BoundReport& r) {
  py::dict d;
  for (const auto& [key, value] : r.details) d[py::str(key)] = value;
  return d;
}

py::dict model_dict(const GalleryModel& model) {
  py::dict d;
  d["name"] = model.name;
  d["kind"] = std::string(to_string(model.kind));
  d["params"] = model.params;
  d["truncation"] = model.truncation;
  d["matrix"] = model.matrix;
  if (model.weight) d["weight"] = model.weight->values();
  return d;
}

StochasticMatrix dtmc(const Matrix& p) { return StochasticMatrix(p); }
IntensityMatrix ctmc(const Matrix& q) { return IntensityMatrix(q); }

std::optional<WeightFunction> weight(const std::optional<Vector>& v) {
  if (!v) return std::nullopt;
  return WeightFunction(*v);
}

}  // namespace

PYBIND11_MODULE(_mcpert, m) {
  m.doc() = "Perturbation bounds for stationary distributions of Markov chains";

  py::register_exception<Error>(m, "MCPertError", PyExc_ValueError);

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("bound_name", &BoundReport::bound_name)
      .def_property_readonly("weighted", [](const BoundReport& r) { return r.norm == BoundNorm::Weighted; })
      .def_readonly("ell", &BoundReport::ell)
      .def_readonly("value", &BoundReport::value)
      .def_readonly("exact_gap", &BoundReport::exact_gap)
      .def_readonly("valid", &BoundReport::valid)
      .def_property_readonly("hypotheses",
                             [](const BoundReport& r) {
                               py::list out;
                               for (const auto& h : r.hypotheses) out.append(py::make_tuple(h.name, h.holds, h.detail));
                               return out;
                             })
      .def_property_readonly("details", &details_of)
      .def("hypotheses_hold", &BoundReport::hypotheses_hold)
      .def("useless", &BoundReport::useless)
      .def("__repr__", [](const BoundReport& r) {
        std::ostringstream os;
        os << "<BoundReport " << r.bound_name;
        if (r.ell) os << " ell=" << *r.ell;
        if (r.value) os << " value=" << *r.value;
        os << ">";
        return os.str();
      });

  m.def("stationary_distribution", [](const Matrix& p) { return stationary_distribution(dtmc(p)).values(); },
        py::arg("p"));
  m.def("stationary_distribution_ctmc", [](const Matrix& q) { return stationary_distribution(ctmc(q)).values(); },
        py::arg("q"));
  m.def(
      "group_inverse",
      [](const Matrix& p) {
        const StochasticMatrix chain = dtmc(p);
        return group_inverse(chain, stationary_distribution(chain));
      },
      py::arg("p"));
  m.def(
      "deviation_matrix",
      [](const Matrix& p) {
        const StochasticMatrix chain = dtmc(p);
        return deviation_matrix(chain, stationary_distribution(chain));
      },
      py::arg("p"));
  m.def(
      "ctmc_deviation_matrix", [](const Matrix& q, std::optional<double> h) { return ctmc_deviation_matrix(ctmc(q), h); },
      py::arg("q"), py::arg("h") = py::none());
  m.def("ergodicity_coefficient", &ergodicity_coefficient, py::arg("b"));
  m.def("ctmc_ergodicity_coefficient", [](const Matrix& q) { return ctmc_ergodicity_coefficient(ctmc(q)); },
        py::arg("q"));
  m.def("hitting_times", [](const Matrix& p, Index target) { return hitting_times(dtmc(p), target); }, py::arg("p"),
        py::arg("target"));
  m.def(
      "value_iteration_hitting", [](const Matrix& p, Index target) { return value_iteration_hitting(dtmc(p), target); },
      py::arg("p"), py::arg("target"));
  m.def(
      "exact_gap",
      [](const Matrix& p, const Matrix& p_tilde, const std::optional<Vector>& v) {
        return exact_gap(DtmcPair(dtmc(p), dtmc(p_tilde)), weight(v));
      },
      py::arg("p"), py::arg("p_tilde"), py::arg("v") = py::none());

  m.def("seneta_bound", [](const Matrix& p, double delta_norm) { return seneta_bound(dtmc(p), delta_norm); },
        py::arg("p"), py::arg("delta_norm") = 0.0);
  m.def(
      "seneta_best_bound",
      [](const Matrix& p, std::optional<double> delta_norm) {
        const StochasticMatrix chain = dtmc(p);
        return seneta_best_bound(chain, stationary_distribution(chain), delta_norm);
      },
      py::arg("p"), py::arg("delta_norm") = py::none());
  m.def(
      "small_set_bound",
      [](const Matrix& p, int m_min, int m_max) { return small_set_bound(dtmc(p), SmallSetOptions{m_min, m_max}).first; },
      py::arg("p"), py::arg("m_min") = 1, py::arg("m_max") = 8);
  m.def(
      "drift_bound_hitting", [](const Matrix& p, std::optional<double> d) { return drift_bound_hitting(dtmc(p), d); },
      py::arg("p"), py::arg("delta_norm") = py::none());
  m.def(
      "v_bounds",
      [](const Matrix& p, const Vector& v, double delta_v_norm) {
        const StochasticMatrix chain = dtmc(p);
        const DriftCertificateD2 cert = fit_drift_d2(chain, WeightFunction(v), 0);
        std::vector<BoundReport> out;
        for (auto make : {+[](const StochasticMatrix& c, const DriftCertificateD2& d, double x) {
                            return v_bound_i(c, d, stationary_distribution(c), x);
                          },
                          +[](const StochasticMatrix&, const DriftCertificateD2& d, double x) { return v_bound_ii(d, x); }}) {
          try {
            out.push_back(make(chain, cert, delta_v_norm));
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::HypothesisFailed) throw;
          }
        }
        return out;
      },
      py::arg("p"), py::arg("v"), py::arg("delta_v_norm"));

  m.def(
      "ctmc_deviation_bound", [](const Matrix& q, std::optional<double> d) { return ctmc_deviation_bound(ctmc(q), d); },
      py::arg("q"), py::arg("delta_norm") = py::none());
  m.def(
      "ctmc_lambda1_bound", [](const Matrix& q, std::optional<double> d) { return ctmc_lambda1_bound(ctmc(q), d); },
      py::arg("q"), py::arg("delta_norm") = py::none());
  m.def(
      "ctmc_drift_bound_hitting",
      [](const Matrix& q, std::optional<double> d) { return ctmc_drift_bound_hitting(ctmc(q), d); }, py::arg("q"),
      py::arg("delta_norm") = py::none());
  m.def(
      "batch_arrival_drift",
      [](const Vector& a, const Vector& b, Index n_states) {
        const BatchArrivalDrift d = batch_arrival_drift(a, b, n_states);
        py::dict out;
        out["z0"] = d.z0;
        out["rho"] = d.rho;
        out["lambda"] = d.certificate.lambda;
        out["b"] = d.certificate.b;
        out["v"] = d.certificate.v.values();
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("n_states"));

  m.def("gallery_names", &gallery_names);
  m.def(
      "gallery_model", [](const std::string& name, const GalleryParams& params) { return model_dict(make_gallery_model(name, params)); },
      py::arg("name"), py::arg("params") = GalleryParams{});
  m.def(
      "fuzz_bounds",
      [](const std::string& name, int cases, double magnitude, std::uint64_t seed, const GalleryParams& params) {
        const FuzzReport report = fuzz_bounds(make_gallery_model(name, params), cases, magnitude, seed);
        py::list summary;
        for (const auto& s : report.summary) {
          py::dict d;
          d["bound"] = s.bound_name;
          d["evaluated"] = s.evaluated;
          d["hypothesis_failures"] = s.hypothesis_failures;
          d["violations"] = s.violations;
          d["useless"] = s.useless;
          d["mean_tightness"] = s.mean_tightness;
          d["max_tightness"] = s.max_tightness;
          summary.append(d);
        }
        py::dict out;
        out["violations"] = report.violations;
        out["cases"] = report.cases.size();
        out["summary"] = summary;
        return out;
      },
      py::arg("name"), py::arg("cases") = 1000, py::arg("magnitude") = 0.01, py::arg("seed") = 1,
      py::arg("params") = GalleryParams{});

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
