#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hlpm/config.hpp"
#include "hlpm/errors.hpp"
#include "hlpm/harness.hpp"
#include "hlpm/metrics.hpp"
#include "hlpm/monotone_graph.hpp"
#include "hlpm/pde.hpp"

namespace py = pybind11;
using namespace hlpm;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

// json crosses the boundary as text; the python side parses it
ExperimentConfig config_from_text(const std::string& text) { return parse_config(json::parse(text, nullptr, true, true)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);

  py::class_<Interval>(m, "Interval")
      .def_readonly("lo", &Interval::lo)
      .def_readonly("hi", &Interval::hi)
      .def("__repr__", [](const Interval& i) { return "Interval(" + std::to_string(i.lo) + ", " + std::to_string(i.hi) + ")"; });

  py::class_<Resolvent>(m, "Resolvent").def_readonly("u", &Resolvent::u).def_readonly("eta", &Resolvent::eta);

  py::class_<MonotoneGraph>(m, "MonotoneGraph")
      .def_property_readonly("name", &MonotoneGraph::name)
      .def_property_readonly("growth_constant", &MonotoneGraph::growth_constant)
      .def("eval", &MonotoneGraph::eval, py::arg("u"))
      .def("resolvent", &MonotoneGraph::resolvent, py::arg("mu"), py::arg("y"))
      .def("classify", [](const MonotoneGraph& g) { return describe(classify(g)); });

  auto graphs = m.def_submodule("graphs", "catalog of monotone graphs");
  graphs.def("identity", &graphs::identity);
  graphs.def("power", &graphs::power, py::arg("m"));
  graphs.def("stopped_linear", &graphs::stopped_linear, py::arg("u_c"));
  graphs.def("saturating", &graphs::saturating);
  graphs.def("jump", &graphs::jump, py::arg("a"), py::arg("lo"), py::arg("hi"));
  graphs.def("zero", &graphs::zero);
  graphs.def("table", &graphs::table, py::arg("u"), py::arg("beta"));

  py::class_<Grid1D>(m, "Grid1D")
      .def_static("half_line", &Grid1D::half_line, py::arg("cells"), py::arg("dx"))
      .def_static("symmetric", &Grid1D::symmetric, py::arg("half_cells"), py::arg("dx"))
      .def_property_readonly("size", &Grid1D::size)
      .def_property_readonly("dx", &Grid1D::dx)
      .def_property_readonly("extent", &Grid1D::extent)
      .def_property_readonly("kind", [](const Grid1D& g) { return to_string(g.kind()); })
      .def("centers", [](const Grid1D& g) { return to_array(g.centers()); });

  py::class_<DensityField>(m, "DensityField")
      .def(py::init([](const Grid1D& g, const py::array_t<double, py::array::c_style | py::array::forcecast>& v,
                       double t) { return DensityField(g, from_array(v), t); }),
           py::arg("grid"), py::arg("values"), py::arg("t") = 0.0)
      .def_property_readonly("grid", &DensityField::grid)
      .def_property_readonly("values", [](const DensityField& f) { return to_array(f.values()); })
      .def_property_readonly("t", &DensityField::t)
      .def_property_readonly("mass", &DensityField::mass);

  py::class_<PdeTrajectory>(m, "PdeTrajectory")
      .def_property_readonly("times", &PdeTrajectory::times)
      .def("density", [](const PdeTrajectory& tr, double t) { return tr.at_time(t).u; }, py::arg("t"))
      .def("eta", [](const PdeTrajectory& tr, double t) { return to_array(tr.at_time(t).eta.values); }, py::arg("t"))
      .def_readonly("steps", &PdeTrajectory::steps)
      .def_readonly("max_mass_deviation", &PdeTrajectory::max_mass_deviation)
      .def_readonly("min_value", &PdeTrajectory::min_value)
      .def_readonly("max_asymmetry", &PdeTrajectory::max_asymmetry);

  m.def(
      "solve",
      [](const DensityField& u0, const MonotoneGraph& beta, double T, double dt, std::vector<double> snapshots,
         std::optional<std::vector<double>> breakpoints) {
        SolveOptions opt;
        opt.snapshot_times = std::move(snapshots);
        opt.breakpoints = std::move(breakpoints);
        py::gil_scoped_release nogil;
        return solve(u0, beta, T, dt, opt);
      },
      py::arg("u0"), py::arg("beta"), py::arg("T"), py::arg("dt"), py::arg("snapshots") = std::vector<double>{},
      py::arg("breakpoints") = py::none());

  m.def(
      "reflected_heat", [](const DensityField& u0, double t, double c) { return reflected_heat(u0, t, c); },
      py::arg("u0"), py::arg("t"), py::arg("diffusivity") = 1.0);

  m.def(
      "compare",
      [](const DensityField& a, const DensityField& b, bool resample) {
        const auto d = compare_densities(a, b, resample);
        return py::dict(py::arg("L1") = d.L1, py::arg("W1") = d.W1);
      },
      py::arg("a"), py::arg("b"), py::arg("resample") = false);

  m.def(
      "normalize_config", [](const std::string& text) { return to_json(config_from_text(text)).dump(); },
      py::arg("text"));
  m.def(
      "config_hash", [](const std::string& text) { return content_hash(to_json(config_from_text(text))); },
      py::arg("text"));

  m.def(
      "run",
      [](const std::string& text, const std::string& pipeline, std::optional<std::filesystem::path> out,
         std::optional<std::uint64_t> seed, std::optional<unsigned> threads) {
        const auto cfg = config_from_text(text);
        const auto p = parse_pipeline(pipeline);
        RunOptions opt{std::move(out), seed, threads};
        std::string dumped;
        {
          py::gil_scoped_release nogil;
          dumped = run(cfg, p, opt).to_json().dump();
        }
        return dumped;
      },
      py::arg("config"), py::arg("pipeline"), py::arg("out") = py::none(), py::arg("seed") = py::none(),
      py::arg("threads") = py::none());
}
