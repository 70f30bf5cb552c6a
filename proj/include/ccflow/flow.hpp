#ifndef CCFLOW_FLOW_HPP
#define CCFLOW_FLOW_HPP

#include <memory>
#include <string>
#include <vector>

#include "ccflow/spectral.hpp"
#include "ccflow/surgery.hpp"

namespace ccflow {

enum class Integrator { RK4Fixed, RK45Adaptive };
enum class SurgeryMode { Off, Delaunay, WeightedDelaunay };

struct FlowConfig {
  double s = 0.0;
  VectorXd target_K;
  Integrator integrator = Integrator::RK45Adaptive;
  double dt_init = 1e-2;
  double dt_min = 1e-10;
  double dt_max = 1.0;
  double rel_tol = 1e-8;  // RK45 local error control
  double abs_tol = 1e-10;
  double tol_curvature = 1e-8; // inf-norm stopping threshold on K - target
  double t_max = 1e3;
  SurgeryMode surgery = SurgeryMode::Off;
  double degeneracy_margin = 1e-9; // min relative triangle-inequality slack
  // Integrate du/dt = Delta^s (K(0) - target) with the initial curvature held
  // fixed, for comparison against the moving-curvature flow.
  bool frozen_initial_curvature = false;
  // With surgery off: reject steps that leave the Delaunay region and report
  // a surgery-needed failure instead of continuing.
  bool delaunay_guard = false;
};

// Checks the admissibility of the target curvature: Euclidean needs
// sum(target) = 2 pi chi to 1e-9; hyperbolic needs sum(target) > 2 pi chi and
// every entry < 2 pi. Throws InvalidTarget.
void validate_target(const FlowConfig& config, const TriangulatedSurface& mesh, Background bg);

struct FlowDiagnostics {
  VectorXd K;
  double calabi = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double gb_residual = 0.0;
  double min_angle = 0.0;
  double min_slack = 0.0;
};

// du/dt = Delta^s (K - target) at the family's current state. Throws on
// degenerate metrics and non-PSD Jacobians.
VectorXd flow_velocity(const TriangulatedSurface& mesh, const ConformalFamily& family,
                       const FlowConfig& config, const VectorXd* frozen_K0 = nullptr,
                       FlowDiagnostics* diag = nullptr);

struct TraceRecord {
  double t = 0.0;
  VectorXd u;
  VectorXd K;
  double calabi = 0.0;
  double sum_u = 0.0;
  double min_angle = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int flips = 0; // flip events between the previous record and this one
};

enum class FlowStatus { Converged, ReachedTMax, StepFailure };

struct FlowResult {
  FlowStatus status = FlowStatus::ReachedTMax;
  bool converged = false;
  bool surgery_needed = false; // Delaunay guard fired
  std::string message;
  std::vector<TraceRecord> trace;
  std::vector<FlipEvent> flip_events;
  double final_residual = 0.0; // inf-norm of K - target at the last state
  double fitted_decay_rate = 0.0;
  double wall_seconds = 0.0;
  long long accepted_steps = 0;
  long long rejected_steps = 0;
  // Run-wide diagnostics, taken over every accepted step.
  double max_gb_residual = 0.0;
  double max_flip_area_drift = 0.0;
  double max_post_surgery_violation = 0.0; // worst -slack seen right after surgery
  double min_radius_floor = 0.0;           // hyperbolic circle packings only
  double max_calabi_uptick = 0.0;          // largest relative increase of the energy
  // Final state.
  TriangulatedSurface final_mesh;
  VectorXd final_lengths;
  VectorXd final_u;
};

FlowResult run_flow(const TriangulatedSurface& mesh, const ConformalFamily& family,
                    const FlowConfig& config);

// Flow with surgery for vertex scaling: validates the target, restores the
// Delaunay condition after every accepted step (and at the start), and keeps
// u accumulating across flips.
FlowResult run_flow_with_surgery(const TriangulatedSurface& mesh, const ScalingFamily& family,
                                 FlowConfig config);

// Experimental: the same loop for general structures, with the weighted
// Delaunay indicator dK_i/du_j <= 0 as the flip trigger. Outcome is reported,
// not asserted.
FlowResult weighted_delaunay_surgery_mode(const TriangulatedSurface& mesh,
                                          const StructureFamily& family, FlowConfig config);

double calabi_energy(const VectorXd& K, const VectorXd& target_K);

// Least-squares decay rate of log(calabi) over the flow's asymptotic tail.
double decay_rate(const std::vector<TraceRecord>& trace);

// Max drift of sum(u) relative to the first record.
double conservation_monitor(const std::vector<TraceRecord>& trace);

// Line-integral potential for circle packings (eps == 1): the integral of
// sum_i (K_i - target_i) du_i from the family's current u to u_end along the
// straight segment, by panel-refined Gauss-Legendre quadrature.
double potential_F(const TriangulatedSurface& mesh, const StructureFamily& base,
                   const VectorXd& target_K, const VectorXd& u_end);

} // namespace ccflow

#endif
