#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ccflow/flow.hpp"
#include "ccflow/io.hpp"
#include "ccflow/jacobian.hpp"

namespace py = pybind11;
using namespace ccflow;

namespace {

Background parse_background(const std::string& name) {
  if (name == "euclidean") return Background::Euclidean;
  if (name == "hyperbolic") return Background::Hyperbolic;
  throw Error(ErrorCode::ParseError, "unknown background '" + name + "'");
}

py::dict metric_dict(const TriangulatedSurface& mesh, const MetricState& ms) {
  py::dict d;
  d["lengths"] = ms.lengths;
  d["angles"] = ms.angle;
  d["K"] = ms.K;
  d["face_areas"] = ms.face_area;
  d["min_angle"] = ms.min_angle;
  d["gauss_bonnet_residual"] = ms.gauss_bonnet_residual(mesh.euler_characteristic());
  return d;
}

py::dict result_dict(const FlowResult& r) {
  py::dict d;
  d["converged"] = r.converged;
  d["status"] = r.status == FlowStatus::Converged
                    ? "converged"
                    : r.status == FlowStatus::ReachedTMax ? "t_max" : "step_failure";
  d["message"] = r.message;
  d["final_residual"] = r.final_residual;
  d["fitted_decay_rate"] = r.fitted_decay_rate;
  d["final_u"] = r.final_u;
  d["final_lengths"] = r.final_lengths;
  d["flip_count"] = static_cast<int>(r.flip_events.size());
  d["accepted_steps"] = r.accepted_steps;
  d["max_gauss_bonnet_residual"] = r.max_gb_residual;
  std::vector<double> t, calabi, sum_u;
  for (const auto& rec : r.trace) {
    t.push_back(rec.t);
    calabi.push_back(rec.calabi);
    sum_u.push_back(rec.sum_u);
  }
  d["t"] = t;
  d["calabi"] = calabi;
  d["sum_u"] = sum_u;
  return d;
}

} // namespace

PYBIND11_MODULE(_ccflow, m) {
  m.doc() = "discrete conformal structures and fractional combinatorial Calabi flows";

  py::register_exception<Error>(m, "CCFlowError");

  py::class_<TriangulatedSurface>(m, "Mesh")
      .def_static("from_faces",
                  [](const std::vector<std::array<int, 3>>& faces, int num_vertices) {
                    return TriangulatedSurface::from_faces(faces, num_vertices);
                  },
                  py::arg("faces"), py::arg("num_vertices") = -1)
      .def_static("preset", &preset_mesh)
      .def_property_readonly("num_vertices", &TriangulatedSurface::num_vertices)
      .def_property_readonly("num_edges", &TriangulatedSurface::num_edges)
      .def_property_readonly("num_faces", &TriangulatedSurface::num_faces)
      .def("euler_characteristic", &TriangulatedSurface::euler_characteristic)
      .def("faces", &TriangulatedSurface::faces)
      .def("edge_endpoints", &TriangulatedSurface::edge_endpoints)
      .def("corners_at_vertex", &TriangulatedSurface::corners_at_vertex)
      .def("flip_edge", &TriangulatedSurface::flip_edge)
      .def("validate", &TriangulatedSurface::validate);

  m.def("preset_names", &preset_names);

  m.def(
      "compute_metric",
      [](const TriangulatedSurface& mesh, const VectorXd& lengths, const std::string& bg) {
        return metric_dict(mesh, compute_metric(mesh, lengths, parse_background(bg)));
      },
      py::arg("mesh"), py::arg("lengths"), py::arg("background"));

  m.def(
      "jacobian",
      [](const TriangulatedSurface& mesh, const VectorXd& lengths, const std::string& bg,
         const std::string& family) {
        const Background b = parse_background(bg);
        std::unique_ptr<ConformalFamily> fam;
        if (family == "vertex_scaling") {
          fam = std::make_unique<ScalingFamily>(b, lengths);
        } else {
          throw Error(ErrorCode::ParseError, "jacobian(): family must be 'vertex_scaling'");
        }
        const MetricState ms = compute_metric(mesh, lengths, b);
        return jacobian_L(mesh, *fam, ms).mat;
      },
      py::arg("mesh"), py::arg("lengths"), py::arg("background"),
      py::arg("family") = "vertex_scaling");

  // Jacobian, lengths and curvature of a weighted structure given u.
  m.def(
      "structure_jacobian",
      [](const TriangulatedSurface& mesh, const std::string& bg, const VectorXi& epsilon,
         const VectorXd& eta, const VectorXd& u) {
        DiscreteConformalStructure dcs;
        dcs.background = parse_background(bg);
        dcs.epsilon = epsilon;
        dcs.eta = eta;
        dcs.u = u;
        const StructureFamily fam(mesh, dcs);
        const MetricState ms = compute_metric(mesh, fam.lengths(), dcs.background);
        py::dict d;
        d["L"] = jacobian_L(mesh, fam, ms).mat;
        d["lengths"] = fam.lengths();
        d["K"] = ms.K;
        return d;
      },
      py::arg("mesh"), py::arg("background"), py::arg("epsilon"), py::arg("eta"),
      py::arg("u"));

  // Restore the Delaunay condition of a scaling metric; returns the new mesh,
  // lengths and the number of flips.
  m.def(
      "flip_to_delaunay",
      [](const TriangulatedSurface& mesh_in, const VectorXd& lengths, const std::string& bg) {
        TriangulatedSurface mesh = mesh_in;
        ScalingFamily fam(parse_background(bg), lengths);
        const auto events = flip_to_delaunay(mesh, fam, 0.0);
        return py::make_tuple(mesh, fam.lengths(), static_cast<int>(events.size()));
      },
      py::arg("mesh"), py::arg("lengths"), py::arg("background"));

  m.def("fractional_power", [](const MatrixXd& L, double s) {
    return fractional_power(spectral_decompose(L), s);
  });
  m.def("spectral_decompose", [](const MatrixXd& L) {
    const SpectralForm spec = spectral_decompose(L);
    return py::make_tuple(spec.lambda, spec.P);
  });

  m.def("delaunay_check", [](const TriangulatedSurface& mesh, const VectorXd& lengths,
                             const std::string& bg) {
    const MetricState ms = compute_metric(mesh, lengths, parse_background(bg));
    const DelaunayReport rep = delaunay_check(mesh, ms);
    py::dict d;
    d["slack"] = rep.slack;
    d["violations"] = rep.violations;
    d["clean"] = rep.clean();
    return d;
  });

  // Runs one experiment from config-file keys; returns the summary and trace.
  m.def(
      "run_experiment",
      [](const py::dict& kwargs) {
        std::stringstream text;
        for (auto item : kwargs) {
          std::string value = py::cast<std::string>(py::str(item.second));
          if (value == "True") value = "true";
          if (value == "False") value = "false";
          text << py::cast<std::string>(py::str(item.first)) << " = " << value << '\n';
        }
        const ExperimentConfig cfg = load_experiment(text);
        PreparedExperiment prep = prepare_experiment(cfg);
        return result_dict(run_flow(prep.mesh, *prep.family, prep.flow));
      },
      py::arg("config"));
}
