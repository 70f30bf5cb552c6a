#ifndef CCFLOW_SURGERY_HPP
#define CCFLOW_SURGERY_HPP

#include <vector>

#include "ccflow/geometry.hpp"

namespace ccflow {

// Per-edge Delaunay slack computed from the current corner angles:
//   Euclidean:  pi - (theta_k^{ij} + theta_l^{ij})
//   hyperbolic: (theta_i^{jk}+theta_i^{jl}+theta_j^{ik}+theta_j^{il})
//               - (theta_k^{ij} + theta_l^{ij})
// where k, l are the corners opposite the edge in its two faces. Slack down
// to -1e-10 still counts as Delaunay (the condition is non-strict).
struct DelaunayReport {
  VectorXd slack;
  std::vector<int> violations; // sorted by most negative slack first
  double min_slack = 0.0;
  bool clean() const { return violations.empty(); }
};

inline constexpr double kDelaunayTolerance = 1e-10;

DelaunayReport delaunay_check(const TriangulatedSurface& mesh, const MetricState& ms);

struct FlipEvent {
  double t = 0.0;
  int v_i = -1, v_j = -1; // endpoints of the flipped edge
  int v_k = -1, v_l = -1; // endpoints of the new diagonal
  double new_length = 0.0;
  double slack_before = 0.0;
  double slack_after = 0.0;
  double area_before = 0.0; // total surface area around the flip
  double area_after = 0.0;
};

enum class FlipTrigger { MetricDelaunay, WeightedDelaunay };

// Flips the worst violating edge (ties broken by lowest edge handle) until the
// chosen Delaunay condition holds, transporting the metric through the
// developed-quadrilateral diagonal. Mutates mesh and family. Throws
// FlipLimitExceeded after 50 * E flips.
std::vector<FlipEvent> flip_to_delaunay(TriangulatedSurface& mesh, ConformalFamily& family,
                                        double t_now,
                                        FlipTrigger trigger = FlipTrigger::MetricDelaunay);

} // namespace ccflow

#endif
