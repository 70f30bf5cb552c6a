#ifndef CCFLOW_GEOMETRY_HPP
#define CCFLOW_GEOMETRY_HPP

#include <array>

#include "ccflow/conformal.hpp"
#include "ccflow/mesh.hpp"

namespace ccflow {

// Geometric snapshot of one metric: angles per corner (indexed by halfedge,
// angle at origin(h) in face(h)), curvature per vertex, area per face
// (Euclidean: planar area; hyperbolic: angle defect pi - sum of angles).
struct MetricState {
  Background background;
  VectorXd lengths;     // per edge
  VectorXd angle;       // per halfedge
  VectorXd K;           // per vertex, 2*pi - cone angle
  VectorXd face_area;   // per face
  double min_angle = 0.0;

  double total_area() const { return face_area.sum(); }
  // Euclidean: sum K - 2 pi chi; hyperbolic: sum K - 2 pi chi - total area.
  double gauss_bonnet_residual(int euler_characteristic) const;
};

// Inner angles of a triangle with side lengths (a, b, c); returns the angles
// opposite a, b, c in that order. Evaluated through half-angle atan2 forms,
// stable at near-degenerate triangles. Throws DegenerateTriangle.
std::array<double, 3> inner_angles(double a, double b, double c, Background bg);

double euclidean_area(double a, double b, double c);
double hyperbolic_area(double theta_a, double theta_b, double theta_c);

MetricState compute_metric(const TriangulatedSurface& mesh, const VectorXd& lengths,
                           Background bg);

VectorXd curvature(const TriangulatedSurface& mesh, const VectorXd& corner_angles);

// Length of the diagonal {kl} replacing {ij} in the developed quadrilateral of
// the two triangles (i,j,k): sides (l_ij, l_jk, l_ki) and (i,j,l): sides
// (l_ij, l_jl, l_li). The development is done around whichever shared-edge
// endpoint has combined angle < pi; if neither has, throws FoldedQuad.
double flip_diagonal_length(double l_ij, double l_jk, double l_ki, double l_il, double l_lj,
                            Background bg);

} // namespace ccflow

#endif
