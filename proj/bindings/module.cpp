#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "svint/analysis.hpp"
#include "svint/geometry.hpp"
#include "svint/integrators.hpp"
#include "svint/noise.hpp"
#include "svint/systems.hpp"
#include "svint/version.hpp"

namespace py = pybind11;
using namespace svint;

namespace {

py::dict simulate(const std::string& model, const std::string& method,
                  const VecX& q0, const VecX& v0, double h, std::int64_t steps,
                  std::uint64_t seed,
                  const std::map<std::string, double>& params,
                  const std::string& retraction) {
  const MechSystem sys = build_mech_model(model, params);
  StepperConfig cfg;
  cfg.h = h;
  cfg.retraction =
      retraction == "cayley" ? Retraction::Cayley : Retraction::Exponential;
  const PhaseState init = sys.state_from_qv(q0, v0);
  const CounterIncrements noise(seed, h, int(sys.noise.size()));
  const Trajectory traj =
      run_trajectory(sys, method_from_string(method), init, steps, noise, cfg);
  const auto n = std::int64_t(traj.states.size());
  MatX qs(n, sys.dim), vs(n, sys.dim), ps(n, sys.dim);
  VecX ts(n);
  for (std::int64_t k = 0; k < n; ++k) {
    ts[k] = traj.times[size_t(k)];
    qs.row(k) = traj.states[size_t(k)].q.transpose();
    vs.row(k) = traj.states[size_t(k)].v.transpose();
    ps.row(k) = traj.states[size_t(k)].p.transpose();
  }
  py::dict out;
  out["t"] = ts;
  out["q"] = qs;
  out["v"] = vs;
  out["p"] = ps;
  return out;
}

py::list models() {
  py::list out;
  for (const ModelInfo& info : list_models()) {
    py::dict d;
    d["name"] = info.name;
    d["kind"] = info.kind;
    d["role"] = info.role;
    d["defaults"] = info.defaults;
    out.append(d);
  }
  return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = SVINT_VERSION;

  py::enum_<Retraction>(m, "Retraction")
      .value("Exponential", Retraction::Exponential)
      .value("Cayley", Retraction::Cayley);

  m.def("hat", &hat, py::arg("v"), "3x3 skew matrix of a 3-vector");
  m.def(
      "vee", [](const Mat3& m_) { return vee(m_); }, py::arg("m"),
      "3-vector of a skew matrix");
  m.def(
      "tau", [](Retraction k, const Vec3& xi) { return tau(k, xi).m; },
      py::arg("kind"), py::arg("xi"), "retraction onto the rotation group");
  m.def(
      "tau_inv",
      [](Retraction k, const Mat3& r) { return tau_inv(k, Rotation{r}); },
      py::arg("kind"), py::arg("r"), "inverse retraction");
  m.def("dtau_inv_apply", &dtau_inv_apply, py::arg("kind"), py::arg("xi"),
        py::arg("eta"));
  m.def("dtau_inv_dual", &dtau_inv_dual, py::arg("kind"), py::arg("xi"),
        py::arg("mu"));

  m.def("list_models", &models, "model catalog with defaults");
  m.def("simulate", &simulate, py::arg("model"), py::arg("method"),
        py::arg("q0"), py::arg("v0"), py::arg("h"), py::arg("steps"),
        py::arg("seed") = 0,
        py::arg("params") = std::map<std::string, double>{},
        py::arg("retraction") = "exponential",
        "integrate a catalog model and return the sampled trajectory");

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<UnknownModel>(m, "UnknownModel");
}
