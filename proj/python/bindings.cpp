// SPDX-License-Identifier: Apache-2.0
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "v2vbpc/bpc.hpp"
#include "v2vbpc/channel.hpp"
#include "v2vbpc/config.hpp"
#include "v2vbpc/errors.hpp"
#include "v2vbpc/optimizer.hpp"
#include "v2vbpc/sim.hpp"

namespace py = pybind11;
using namespace v2vbpc;

namespace {

template <class F>
py::array_t<double> column(const std::vector<TimeStepRecord>& rs, F f) {
  py::array_t<double> a(static_cast<py::ssize_t>(rs.size()));
  auto m = a.mutable_unchecked<1>();
  for (std::size_t i = 0; i < rs.size(); ++i) m(static_cast<py::ssize_t>(i)) = f(rs[i]);
  return a;
}

py::dict simulate(const std::string& config_text, const std::vector<std::string>& overrides) {
  std::istringstream is(config_text);
  AppConfig cfg = parse_config(is, "<python>");
  for (const auto& o : overrides) apply_override(cfg, o);
  const Trajectory traj = build_trajectory(cfg);
  RunResult res;
  {
    py::gil_scoped_release release;
    res = run(cfg.sim, traj);
  }
  const auto& r = res.records;
  py::dict records;
  records["t"] = column(r, [](const auto& x) { return x.t; });
  records["d"] = column(r, [](const auto& x) { return x.d; });
  records["omega1_az"] = column(r, [](const auto& x) { return x.w1.az; });
  records["omega1_el"] = column(r, [](const auto& x) { return x.w1.el; });
  records["omega2_az"] = column(r, [](const auto& x) { return x.w2.az; });
  records["omega2_el"] = column(r, [](const auto& x) { return x.w2.el; });
  records["ptx_dbm"] = column(r, [](const auto& x) { return x.ptx_dbm; });
  records["snr_db"] = column(r, [](const auto& x) { return x.snr_db; });
  records["outage"] = column(r, [](const auto& x) { return x.outage ? 1.0 : 0.0; });

  const Summary& s = res.summary;
  py::dict summary;
  summary["steps"] = s.steps;
  summary["outage_rate"] = s.outage_rate;
  summary["ptx_mean_dbm"] = s.ptx_mean_dbm;
  summary["ptx_median_dbm"] = s.ptx_median_dbm;
  summary["beam_min"] = s.beam_min;
  summary["beam_max"] = s.beam_max;
  summary["beam_mean"] = s.beam_mean;
  summary["eirp_clipped_steps"] = s.eirp_clipped_steps;
  summary["infeasible_steps"] = s.infeasible_steps;

  py::dict out;
  out["records"] = records;
  out["summary"] = summary;
  out["config"] = serialize_config(cfg);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Beamwidth and power control for mmWave V2V links";

  static PyObject* error = PyErr_NewException("v2vbpc._core.Error", PyExc_RuntimeError, nullptr);
  m.attr("Error") = py::handle(error);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error)(e.what());
      exc.attr("kind") = to_string(e.kind());
      PyErr_SetObject(error, exc.ptr());
    }
  });

  py::class_<Beamwidth>(m, "Beamwidth")
      .def(py::init<double, double>(), py::arg("az"), py::arg("el"))
      .def_readwrite("az", &Beamwidth::az)
      .def_readwrite("el", &Beamwidth::el)
      .def("__repr__", [](const Beamwidth& w) {
        return "Beamwidth(az=" + std::to_string(w.az) + ", el=" + std::to_string(w.el) + ")";
      });

  py::class_<LinkConfig>(m, "LinkConfig")
      .def(py::init(&default_link_config))
      .def_readwrite("f0_hz", &LinkConfig::f0_hz)
      .def_readwrite("bandwidth_hz", &LinkConfig::bandwidth_hz)
      .def_readwrite("noise_power_dbm", &LinkConfig::noise_power_dbm)
      .def_readwrite("eirp_max_dbm", &LinkConfig::eirp_max_dbm)
      .def_readwrite("gain_constant", &LinkConfig::gain_constant)
      .def_readwrite("snr_min_db", &LinkConfig::snr_min_db)
      .def_readwrite("power_margin_db", &LinkConfig::power_margin_db);

  py::class_<BeamLimits>(m, "BeamLimits")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("min_rad"), py::arg("max_rad"))
      .def_readwrite("min_rad", &BeamLimits::min_rad)
      .def_readwrite("max_rad", &BeamLimits::max_rad);

  py::class_<SideSolution>(m, "SideSolution")
      .def_readonly("w", &SideSolution::w)
      .def_readonly("p_mis", &SideSolution::p_mis)
      .def_readonly("attainable", &SideSolution::attainable)
      .def_readonly("iterations", &SideSolution::bisection_iterations);

  m.def("deg2rad", &deg2rad);
  m.def("rad2deg", &rad2deg);
  m.def(
      "pattern_gain",
      [](double d_az, double d_el, const Beamwidth& w) { return pattern_gain({d_az, d_el}, w); },
      py::arg("d_az"), py::arg("d_el"), py::arg("w"));
  m.def("max_gain_db", &max_gain_db, py::arg("w"), py::arg("cfg") = default_link_config());
  m.def("path_loss_db", &path_loss_db, py::arg("d_m"), py::arg("f0_hz") = 28e9);
  m.def("snr_min_from_ber", &snr_min_from_ber, py::arg("ber"));
  m.def("p_beam_cover", &p_beam_cover, py::arg("w"), py::arg("C"), py::arg("d"));
  m.def("p_mis_total", &p_mis_total, py::arg("p_tx"), py::arg("p_rx"));
  m.def("per_side_target", &per_side_target, py::arg("budget"));
  m.def("optimize_side", &optimize_side, py::arg("C"), py::arg("d"), py::arg("target"),
        py::arg("limits") = BeamLimits{});
  m.def("required_ptx_worstcase", &required_ptx_worstcase, py::arg("w1"), py::arg("w2"),
        py::arg("d"), py::arg("cfg") = default_link_config());
  m.def("simulate", &simulate, py::arg("config") = "",
        py::arg("overrides") = std::vector<std::string>{},
        "Run one simulation from INI text plus section.key=value overrides.");
}
