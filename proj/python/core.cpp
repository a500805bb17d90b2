// Python bindings for the pilotwave library.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pilotwave/diagnostics.hpp"
#include "pilotwave/ensemble.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/experiments.hpp"
#include "pilotwave/integrator.hpp"
#include "pilotwave/version.hpp"
#include "pilotwave/wavefunction.hpp"

namespace py = pybind11;
using namespace pilotwave;

namespace {

using Pair = std::pair<double, double>;

Point point(const Pair& p) { return {p.first, p.second}; }
Pair pair(Point p) { return {p.q1, p.q2}; }

std::vector<Pair> pairs(const std::vector<Point>& pts) {
  std::vector<Pair> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(pair(p));
  return out;
}

std::vector<Point> points(const std::vector<Pair>& in) {
  std::vector<Point> out;
  out.reserve(in.size());
  for (const auto& p : in) out.push_back(point(p));
  return out;
}

py::array_t<double> samples_array(const Trajectory& traj) {
  py::array_t<double> a({static_cast<py::ssize_t>(traj.samples.size()), py::ssize_t{3}});
  auto m = a.mutable_unchecked<2>();
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    m(k, 0) = traj.samples[k].t;
    m(k, 1) = traj.samples[k].q1;
    m(k, 2) = traj.samples[k].q2;
  }
  return a;
}

WaveFunctionSpec spec_from(const std::string& phase_set, py::object epsilon) {
  const auto phases = published_phase_set(phase_set);
  if (py::isinstance<py::dict>(epsilon)) {
    std::vector<std::pair<std::string, double>> amps;
    for (auto item : epsilon.cast<py::dict>()) {
      amps.emplace_back(item.first.cast<std::string>(), item.second.cast<double>());
    }
    return make_spec(phases, amps);
  }
  return make_spec(phases, epsilon.cast<double>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Trajectories of the de Broglie-Bohm velocity field for perturbed 2D oscillator states";
  m.attr("__version__") = kVersion;
  m.attr("PERIOD") = kPeriod;

  py::register_exception<InvalidSpec>(m, "InvalidSpec", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<NodeProximity>(m, "NodeProximity", PyExc_ArithmeticError);
  py::register_exception<IntegrationError>(m, "IntegrationError", PyExc_RuntimeError);

  py::class_<WaveFunctionSpec>(m, "WaveFunctionSpec")
      .def_static("ground_state", &WaveFunctionSpec::ground_state)
      .def_static("parse", &WaveFunctionSpec::parse, py::arg("text"))
      .def_static("published", &spec_from, py::arg("phase_set"), py::arg("epsilon"),
                  "Spec from a published phase set; epsilon is a number or a {label: amplitude} dict")
      .def("serialize", &WaveFunctionSpec::serialize)
      .def("fingerprint", &WaveFunctionSpec::fingerprint)
      .def("modes",
           [](const WaveFunctionSpec& s) {
             std::vector<std::pair<int, int>> out;
             for (const auto& t : s.terms()) out.emplace_back(t.mode.m, t.mode.n);
             return out;
           })
      .def("amplitudes",
           [](const WaveFunctionSpec& s) {
             std::vector<double> out;
             for (const auto& t : s.terms()) out.push_back(t.amplitude);
             return out;
           })
      .def("phases",
           [](const WaveFunctionSpec& s) {
             std::vector<double> out;
             for (const auto& t : s.terms()) out.push_back(t.phase);
             return out;
           })
      .def("__eq__", [](const WaveFunctionSpec& a, const WaveFunctionSpec& b) { return a == b; })
      .def("__repr__", [](const WaveFunctionSpec& s) { return "<WaveFunctionSpec " + s.fingerprint() + ">"; });

  m.def("psi", py::overload_cast<const WaveFunctionSpec&, double, double, double>(&psi), py::arg("spec"),
        py::arg("q1"), py::arg("q2"), py::arg("t"));
  m.def("grad_psi", &grad_psi, py::arg("spec"), py::arg("q1"), py::arg("q2"), py::arg("t"));
  m.def("born_density", &born_density, py::arg("spec"), py::arg("q1"), py::arg("q2"), py::arg("t"));
  m.def(
      "velocity",
      [](const WaveFunctionSpec& spec, double q1, double q2, double t) {
        const auto v = velocity(spec, q1, q2, t);
        return Pair{v.v1, v.v2};
      },
      py::arg("spec"), py::arg("q1"), py::arg("q2"), py::arg("t"));
  m.def("eigenstate", &eigenstate, py::arg("m"), py::arg("q"));

  m.def("canonical_points", [] { return pairs(canonical_points()); });
  m.def(
      "square_cohort", [](Pair c, double edge) { return pairs(square_cohort(point(c), edge)); }, py::arg("center"),
      py::arg("edge") = 0.04);
  m.def("phase_set_names", [] {
    std::vector<std::string> out;
    for (const auto& s : published_phase_sets()) out.push_back(s.name);
    return out;
  });

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("start", [](const Trajectory& t) { return pair(t.start); })
      .def_property_readonly("samples", &samples_array, "(n, 3) array of t, q1, q2")
      .def_property_readonly("complete", &Trajectory::complete)
      .def_readonly("steps_taken", &Trajectory::steps_taken)
      .def_readonly("min_density_seen", &Trajectory::min_density_seen)
      .def_property_readonly("failure", [](const Trajectory& t) -> py::object {
        if (!t.failure) return py::none();
        return py::str(std::string(to_string(t.failure->kind)) + ": " + t.failure->message);
      });

  m.def(
      "integrate",
      [](const WaveFunctionSpec& spec, Pair start, int periods, double abstol) {
        IntegratorConfig config;
        config.abstol = abstol;
        py::gil_scoped_release release;
        return integrate_trajectory(spec, point(start), periods * kPeriod, config);
      },
      py::arg("spec"), py::arg("start"), py::arg("periods"), py::arg("abstol") = 1e-8);

  m.def(
      "classify",
      [](const Trajectory& traj, std::vector<double> checkpoint_periods) {
        const auto series = bounding_box_series(traj, periods_to_times(checkpoint_periods));
        const auto verdict = classify_confinement(series);
        return py::make_tuple(std::string(to_string(verdict.label)), verdict.growth_tail, series.widths,
                              series.heights);
      },
      py::arg("trajectory"), py::arg("checkpoint_periods"),
      "Returns (label, tail growth, widths, heights)");
  m.def(
      "coverage", [](const Trajectory& traj, const WaveFunctionSpec& spec) {
        return coverage_fraction(occupancy_grid(traj), spec);
      },
      py::arg("trajectory"), py::arg("spec"));
  m.def("angular_drift_rate", &angular_drift_rate, py::arg("trajectory"));

  m.def(
      "sample_ensemble",
      [](const std::string& kind, std::size_t n, std::uint64_t seed, const WaveFunctionSpec* spec) {
        return pairs(sample_initial(InitialDistribution::parse(kind), n, seed, spec).points);
      },
      py::arg("kind"), py::arg("n"), py::arg("seed"), py::arg("spec") = nullptr);
  m.def(
      "hbar",
      [](const std::vector<Pair>& pts, const WaveFunctionSpec& spec, double t) {
        EnsembleState state;
        state.points = points(pts);
        state.t = t;
        return coarse_grained_H(state, spec).hbar;
      },
      py::arg("points"), py::arg("spec"), py::arg("t") = 0.0);

  m.def("scenario_names", [] {
    std::vector<std::string> out;
    for (const auto& s : scenario_catalog()) out.push_back(s.name);
    return out;
  });
  m.def(
      "scenario_text", [](const std::string& name) { return find_scenario(name).to_text(); }, py::arg("name"));
  m.def(
      "run_scenario",
      [](const std::string& name, const std::filesystem::path& out_dir, int periods, bool write_files) {
        auto scenario = find_scenario(name);
        if (periods > 0 && periods != scenario.horizon_periods) scenario = truncated(scenario, periods);
        RunOptions options;
        options.write_csv = write_files;
        options.write_svg = write_files;
        std::string report;
        {
          py::gil_scoped_release release;
          report = run_scenario(scenario, options, out_dir).report.dump();
        }
        return py::module_::import("json").attr("loads")(report);
      },
      py::arg("name"), py::arg("out_dir"), py::arg("periods") = 0, py::arg("write_files") = true,
      "Runs a catalog scenario and returns its summary as a dict");
}
