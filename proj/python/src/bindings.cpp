#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "netloss/certificates.hpp"
#include "netloss/errors.hpp"
#include "netloss/experiment.hpp"
#include "netloss/tail_bounds.hpp"

namespace py = pybind11;
using namespace netloss;

namespace {

using Rows = std::vector<std::vector<double>>;

Mat to_mat(const Rows& rows) {
  if (rows.empty() || rows.front().empty()) throw ValidationError("matrix must be non-empty");
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) throw ValidationError("matrix rows must have equal length");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Mat(rows.size(), rows.front().size(), std::move(flat));
}

Rows to_rows(const Mat& m) {
  Rows out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

ExperimentSpec spec_from(const std::string& ref_or_json) {
  const auto first = ref_or_json.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && ref_or_json[first] == '{') return parse_experiment(ref_or_json);
  return load_experiment_ref(ref_or_json);
}

RunOverrides overrides(std::optional<std::uint64_t> seed, std::optional<std::uint64_t> paths) {
  RunOverrides o;
  o.seed = seed;
  o.paths = paths;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Event-triggered control over lossy channels: certificates, tail bounds, Monte Carlo.";

  // Translators are tried newest first, so the base class goes in first.
  py::register_exception<Error>(m, "NetlossError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<InfeasibleDesign>(m, "InfeasibleDesign", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("preset_names", &preset_names);
  m.def("preset_text", [](const std::string& name) { return std::string(preset_text(name)); });

  m.def(
      "run_json",
      [](const std::string& ref, std::optional<std::uint64_t> seed, std::optional<std::uint64_t> paths) {
        const ExperimentSpec spec = spec_from(ref);
        BatchResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(spec, overrides(seed, paths));
        }
        return to_json(r);
      },
      py::arg("ref"), py::arg("seed") = py::none(), py::arg("paths") = py::none());

  m.def(
      "run_to_dir",
      [](const std::string& ref, const std::string& out_dir, const std::string& format,
         std::optional<std::uint64_t> seed, std::optional<std::uint64_t> paths) {
        if (format != "csv" && format != "json") throw ValidationError("format must be 'csv' or 'json'");
        const ExperimentSpec spec = spec_from(ref);
        py::gil_scoped_release release;
        emit(run_experiment(spec, overrides(seed, paths)), format == "csv" ? OutputFormat::csv : OutputFormat::json,
             out_dir);
      },
      py::arg("ref"), py::arg("out_dir"), py::arg("format") = "csv", py::arg("seed") = py::none(),
      py::arg("paths") = py::none());

  m.def("certify_json", [](const std::string& ref) { return to_json(certify(spec_from(ref))); });

  m.def(
      "design_json",
      [](const Rows& a, const Rows& b, double rho, double delta, const std::vector<double>& grid) {
        const PlantModel plant(to_mat(a), to_mat(b));
        return to_json(grid.empty() ? design_gain(plant, rho, delta) : design_gain(plant, rho, delta, grid));
      },
      py::arg("A"), py::arg("B"), py::arg("rho"), py::arg("delta") = 0.01,
      py::arg("beta_grid") = std::vector<double>{});

  m.def(
      "check_stability",
      [](const Rows& a, const Rows& b, const Rows& k, const Rows& p, double beta, double phi, double rho) {
        const auto c = check_stability(PlantModel(to_mat(a), to_mat(b)), to_mat(k), to_mat(p), beta, phi, rho);
        py::dict d;
        d["pass"] = c.pass;
        d["contraction_margin"] = c.contraction_margin;
        d["growth_margin"] = c.growth_margin;
        d["exponent"] = c.exponent;
        d["nu"] = c.nu;
        d["tol"] = c.tol;
        return d;
      },
      py::arg("A"), py::arg("B"), py::arg("K"), py::arg("P"), py::arg("beta"), py::arg("phi"), py::arg("rho"));

  m.def(
      "check_instability",
      [](const Rows& a, const Rows& b, const Rows& k, const Rows& p_hat, double beta_hat, double phi_hat,
         double sigma) {
        const auto c =
            check_instability(PlantModel(to_mat(a), to_mat(b)), to_mat(k), to_mat(p_hat), beta_hat, phi_hat, sigma);
        py::dict d;
        d["pass"] = c.pass;
        d["expansion_margin"] = c.expansion_margin;
        d["open_loop_margin"] = c.open_loop_margin;
        d["exponent"] = c.exponent;
        d["tol"] = c.tol;
        return d;
      },
      py::arg("A"), py::arg("B"), py::arg("K"), py::arg("P_hat"), py::arg("beta_hat"), py::arg("phi_hat"),
      py::arg("sigma"));

  m.def(
      "gain_from_qm",
      [](const Rows& q, const Rows& mm) {
        const GainPair g = gain_from_qm(to_mat(q), to_mat(mm));
        return py::make_tuple(to_rows(g.k), to_rows(g.p));
      },
      py::arg("Q"), py::arg("M"));

  m.def(
      "chernoff_phi", [](double rho, double p_tilde, double w_tilde) { return chernoff_phi({rho, p_tilde, w_tilde}); },
      py::arg("rho"), py::arg("p_tilde"), py::arg("w_tilde") = 1.0);
  m.def(
      "psi_k",
      [](double rho, double p_tilde, std::uint64_t k, double w_tilde, double sigma_tilde_k) {
        return psi_k({rho, p_tilde, w_tilde}, sigma_tilde_k, k);
      },
      py::arg("rho"), py::arg("p_tilde"), py::arg("k"), py::arg("w_tilde") = 1.0, py::arg("sigma_tilde_k") = 0.0);
  m.def(
      "exact_tail",
      [](const std::string& chain_json, unsigned k, double rho) {
        return exact_tail_oracle(parse_chain_json(chain_json), k, rho);
      },
      py::arg("chain_json"), py::arg("k"), py::arg("rho"));
  m.def("jamming_tail_bound", &jamming_tail_bound, py::arg("kappa"), py::arg("tau"), py::arg("rho_m"), py::arg("k"));
}
