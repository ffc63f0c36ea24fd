// brox._core: thin bindings over the environment, spectral and experiment layers.

#include <bit>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "brox/config.hpp"
#include "brox/errors.hpp"
#include "brox/experiments.hpp"
#include "brox/noise.hpp"
#include "brox/spectrum.hpp"

namespace py = pybind11;

namespace {

brox::ExperimentConfig config_from(const std::map<std::string, std::string>& overrides) {
  brox::ExperimentConfig cfg;
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

py::dict table_dict(const brox::io::Table& t) {
  py::dict cols;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    py::list col;
    for (const auto& r : t.rows) col.append(r[c]);
    cols[py::str(t.columns[c])] = col;
  }
  return cols;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Brox diffusion in a periodic Brownian environment";
  m.attr("__version__") = brox::exp::version_string();

  auto base = py::register_exception<brox::Error>(m, "BroxError", PyExc_RuntimeError);
  py::register_exception<brox::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<brox::ParameterError>(m, "ParameterError", base.ptr());

  m.def(
      "noise_coefficients",
      [](std::uint64_t seed, int k_max) { return brox::sample_noise(seed, k_max).coeffs; }, py::arg("seed"),
      py::arg("k_max"), "ξ_1..ξ_{k_max} of the environment with this seed");

  m.def(
      "environment",
      [](std::uint64_t seed, int n, std::size_t M, int K) {
        const brox::PeriodicGrid g(M, K);
        const auto z = brox::sample_noise(seed, n);
        const brox::FourierField xi = brox::truncate(z, n, g);
        py::dict d;
        d["x"] = g.nodes();
        d["xi"] = xi.values();
        d["W"] = brox::potential_of(xi).values();
        return d;
      },
      py::arg("seed"), py::arg("n"), py::arg("M") = 1024, py::arg("K") = 341,
      "ξₙ and Wₙ on the M-point grid");

  m.def(
      "eigenvalues",
      [](std::uint64_t seed, int n, int basis_modes, bool flat, bool ground_state) {
        const brox::PeriodicGrid g(std::max<std::size_t>(1024, std::bit_ceil(3 * static_cast<std::size_t>(n) + 1)),
                                   std::max(341, n));
        auto z = brox::sample_noise(seed, n);
        if (flat)
          for (auto& c : z.coeffs) c = 0.0;
        const brox::FourierField W = brox::potential(z, n, g);
        const auto gal = ground_state ? brox::assemble_ground_state(W, basis_modes) : brox::assemble_weighted(W, basis_modes);
        return Eigen::VectorXd(brox::eigendecompose(gal, n).eigenvalues);
      },
      py::arg("seed"), py::arg("n"), py::arg("basis_modes") = 128, py::arg("flat") = false,
      py::arg("ground_state") = false, "Galerkin eigenvalues λ₁ ≥ λ₂ ≥ … of 𝓛ₙ");

  m.def("commands", [] {
    std::vector<std::string> names;
    for (const auto& [name, runner] : brox::exp::registry()) names.push_back(name);
    return names;
  });

  m.def("default_config", [] { return brox::ExperimentConfig{}.to_map(); });
  m.def("config_schema", [] { return brox::ExperimentConfig::schema(); });

  m.def(
      "run",
      [](const std::string& command, std::uint64_t seed, const std::map<std::string, std::string>& overrides) {
        const brox::ExperimentConfig cfg = config_from(overrides);
        brox::exp::Outcome o;
        {
          py::gil_scoped_release release;
          o = brox::exp::run(command, cfg, seed);
        }
        py::list checks;
        for (const auto& c : o.checks) {
          py::dict d;
          d["name"] = c.name;
          d["value"] = c.value;
          d["relation"] = c.relation;
          d["threshold"] = c.threshold;
          if (c.relation == "in") d["threshold_hi"] = c.threshold_hi;
          d["pass"] = c.pass;
          checks.append(d);
        }
        py::dict tables;
        for (const auto& [name, t] : o.tables) tables[py::str(name)] = table_dict(t);
        py::dict out;
        out["command"] = o.command;
        out["seed"] = o.seed;
        out["ok"] = o.ok();
        out["checks"] = checks;
        out["tables"] = tables;
        out["metrics"] = table_dict(o.metrics);
        out["extra"] = o.extra.dump();
        return out;
      },
      py::arg("command"), py::arg("seed") = 1, py::arg("overrides") = std::map<std::string, std::string>{},
      "run one experiment for one seed; overrides are key=value config assignments");
}
