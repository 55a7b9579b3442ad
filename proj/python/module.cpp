#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cvshadow/bounds.hpp"
#include "cvshadow/harness.hpp"
#include "cvshadow/io.hpp"
#include "cvshadow/validation.hpp"

namespace py = pybind11;
using namespace cvshadow;
using nlohmann::json;

namespace {

FockOperator as_operator(const Matrix& m) { return FockOperator(m); }

// Samples as an (T, 2) array of (theta, x).
std::vector<HomodyneSample> homodyne_rows(const RealMatrix& rows) {
  if (rows.cols() != 2) throw std::invalid_argument("expected an array of shape (T, 2): theta, x");
  std::vector<HomodyneSample> out(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    out[i] = {rows(i, 0), rows(i, 1)};
    validate(out[i]);
  }
  return out;
}

std::vector<PnrSample> pnr_rows(const std::vector<int>& n, const std::vector<Complex>& alpha) {
  if (n.size() != alpha.size()) throw std::invalid_argument("n and alpha differ in length");
  std::vector<PnrSample> out(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) out[i] = {n[i], alpha[i]};
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Classical-shadow tomography of bosonic modes";
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def(
      "state_matrix",
      [](const std::string& spec, int min_cutoff) {
        return make_state(state_from_json(json::parse(spec), min_cutoff)).matrix();
      },
      py::arg("spec"), py::arg("min_cutoff") = 1);
  m.def(
      "project", [](const Matrix& rho, int N) { return project(as_operator(rho), N).matrix(); }, py::arg("rho"),
      py::arg("N"));
  m.def(
      "infinity_norm", [](const Matrix& x) { return infinity_norm(x); }, py::arg("x"));
  m.def(
      "trace_norm", [](const Matrix& x) { return trace_norm(x); }, py::arg("x"));
  m.def(
      "wigner",
      [](const Matrix& rho, double extent, int points) {
        const auto g = wigner(as_operator(rho), {-extent, extent, points, -extent, extent, points});
        return py::make_tuple(g.q, g.p, g.values);
      },
      py::arg("rho"), py::arg("extent") = 5.0, py::arg("points") = 101);

  m.def(
      "simulate_homodyne",
      [](const Matrix& rho, std::size_t T, std::uint64_t seed) {
        Rng rng(seed);
        const auto s = draw_homodyne(as_operator(rho), rng, T);
        RealMatrix out(s.size(), 2);
        for (std::size_t i = 0; i < s.size(); ++i) out.row(i) << s[i].theta, s[i].x;
        return out;
      },
      py::arg("rho"), py::arg("T"), py::arg("seed") = 0);
  m.def(
      "simulate_pnr",
      [](const Matrix& rho, std::size_t T, double r, double alpha_max, std::uint64_t seed) {
        Rng rng(seed);
        const auto s = sample_pnr_outcomes(PnrSampler(as_operator(rho)), TParams{r, alpha_max}, rng, T);
        std::vector<int> n(s.size());
        std::vector<Complex> alpha(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
          n[i] = s[i].n;
          alpha[i] = s[i].alpha;
        }
        return py::make_tuple(n, alpha);
      },
      py::arg("rho"), py::arg("T"), py::arg("r") = 0.0, py::arg("alpha_max") = 2.0, py::arg("seed") = 0);

  m.def(
      "homodyne_estimate",
      [](const RealMatrix& samples, int N) {
        const auto s = homodyne_rows(samples);
        return shadow_estimate(s, PatternEvaluator(N), N).matrix();
      },
      py::arg("samples"), py::arg("N"));
  m.def(
      "pnr_estimate",
      [](const std::vector<int>& n, const std::vector<Complex>& alpha, int N, double r, double alpha_max) {
        const TParams params{r, alpha_max};
        return pnr_shadow(filter_pnr(pnr_rows(n, alpha), N), params, N).estimate().matrix();
      },
      py::arg("n"), py::arg("alpha"), py::arg("N"), py::arg("r") = 0.0, py::arg("alpha_max") = 2.0);

  m.def(
      "lemma1_T",
      [](double eps, double delta, int N, double nu_sq, double R) { return lemma1_T({eps, delta, N, nu_sq, R}); },
      py::arg("epsilon"), py::arg("delta"), py::arg("N"), py::arg("nu_sq"), py::arg("R"));
  m.def("homodyne_T", &homodyne_T, py::arg("epsilon"), py::arg("delta"), py::arg("N"), py::arg("C2") = 1.0,
        py::arg("C3") = 1.0);
  m.def("pnr_T", &pnr_T, py::arg("epsilon"), py::arg("delta"), py::arg("N"), py::arg("r"), py::arg("A"));
  m.def("multimode_T", &multimode_T, py::arg("epsilon"), py::arg("delta"), py::arg("N"), py::arg("modes"),
        py::arg("nu1_sq"), py::arg("sum_abs_c"), py::arg("R"));

  m.def(
      "_run_scaling", [](const std::string& config) { return to_json(run_scaling(config_from_json(json::parse(config)))).dump(); },
      py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "_reconstruct",
      [](const std::string& records, const std::string& protocol, int N, double r, double alpha_max) {
        ReconstructionRequest req;
        req.protocol = protocol_from_json(json{{"kind", protocol}, {"r", r}, {"alpha_max", alpha_max}});
        req.N = N;
        req.records = records;
        const auto res = run_reconstruction(req);
        return py::make_tuple(res.estimate.matrix(), res.report.dump());
      },
      py::arg("records"), py::arg("protocol"), py::arg("N"), py::arg("r"), py::arg("alpha_max"));
  m.def(
      "_validate",
      [](bool full) {
        std::vector<py::dict> out;
        for (const auto& c : run_validation(full)) {
          py::dict d;
          d["name"] = c.name;
          d["passed"] = c.passed;
          d["measured"] = c.measured;
          d["limit"] = c.limit;
          d["detail"] = c.detail;
          out.push_back(d);
        }
        return out;
      },
      py::arg("full") = false);
}
