#ifndef CCFLOW_IO_HPP
#define CCFLOW_IO_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "ccflow/flow.hpp"

namespace ccflow {

// Mesh text format: header "N F", then F lines of three 0-based vertex
// indices. Delta-complex presets with ambiguous face lists are addressed by
// name instead ("preset:one_vertex_torus").
TriangulatedSurface read_mesh(std::istream& in);
TriangulatedSurface read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const TriangulatedSurface& mesh);

// Resolves "preset:NAME" or a file path.
TriangulatedSurface resolve_mesh(const std::string& source);

// Structure file: "format=1", "background <name>", then per-vertex lines
// "v i eps_i f_i" and per-edge lines "e k eta_k". Values are written with 17
// significant digits.
DiscreteConformalStructure read_structure(std::istream& in, const TriangulatedSurface& mesh);
DiscreteConformalStructure read_structure_file(const std::string& path,
                                               const TriangulatedSurface& mesh);
void write_structure(std::ostream& out, const TriangulatedSurface& mesh,
                     const DiscreteConformalStructure& dcs);

// Experiment configuration: "key = value" lines, '#' comments. See the README
// for the grammar. load -> dump -> load is a fixpoint.
struct ExperimentConfig {
  std::string mesh = "preset:tetra_sphere";
  std::string structure = "cp-euclidean"; // cp-*, vs-*, mixed-* with -euclidean/-hyperbolic
  std::string structure_file;             // optional explicit structure
  std::string eta = "default";            // default | uniform:VAL | list:v0,v1,...
  std::string epsilon = "default";        // default | alternating | list:...
  std::string u0 = "zeros";               // zeros | random | perturb | list:...
  unsigned seed = 1;
  double u0_range = 0.5;
  std::string target = "uniform";         // uniform | current | list:...
  double s = 0.0;
  std::string integrator = "rk45";        // rk45 | rk4
  double dt_init = 1e-2;
  double dt_min = 1e-10;
  double dt_max = 1.0;
  double tol_curvature = 1e-8;
  double t_max = 1e3;
  std::string surgery = "off";            // off | delaunay | weighted_delaunay
  bool frozen_initial_curvature = false;
  bool delaunay_guard = false;
  std::string trace_path;
  std::string summary_path;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig load_experiment(std::istream& in);
ExperimentConfig load_experiment_file(const std::string& path);
void dump_experiment(std::ostream& out, const ExperimentConfig& cfg);

// Everything needed to run one experiment.
struct PreparedExperiment {
  TriangulatedSurface mesh;
  std::unique_ptr<ConformalFamily> family;
  FlowConfig flow;
  Background background = Background::Euclidean;
};

PreparedExperiment prepare_experiment(const ExperimentConfig& cfg);

// Trace CSV: "format=1" comment header, then
// t,calabi_energy,sum_u,min_angle,lambda_min,lambda_max,flips,K_0..,u_0..
// Flip events are interleaved as rows starting with the literal FLIP:
// FLIP,t,v_i,v_j,v_k,v_l,new_length,slack_before,slack_after
void emit_trace(std::ostream& out, const FlowResult& result);
void emit_trace_file(const std::string& path, const FlowResult& result);

// Summary: "key=value" block (converged flag, residual, fitted rate, flips,
// wall time).
void emit_summary(std::ostream& out, const FlowResult& result);

std::string format_double(double x); // 17 significant digits

} // namespace ccflow

#endif
