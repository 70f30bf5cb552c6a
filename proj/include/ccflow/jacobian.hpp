#ifndef CCFLOW_JACOBIAN_HPP
#define CCFLOW_JACOBIAN_HPP

#include <Eigen/Dense>

#include "ccflow/conformal.hpp"
#include "ccflow/geometry.hpp"

namespace ccflow {

using Eigen::Matrix3d;
using Eigen::MatrixXd;

// L = dK/du assembled from per-face angle gradients.
//
// edge_cross[e] holds the contribution of e's two incident faces to
// dK_i/du_j across that edge; it is the per-edge weighted Delaunay indicator
// (<= 0 means the edge is weighted Delaunay).
struct JacobianL {
  MatrixXd mat;
  VectorXd edge_cross;
  Background background;
};

// d theta[corner a] / d u[slot b] for one face; corners and slots follow
// face_halfedges order. In the Euclidean background rows sum to zero (angles
// are invariant under a uniform shift of u).
Matrix3d angle_gradients(const TriangulatedSurface& mesh, const ConformalFamily& family,
                         const MetricState& ms, int face);

JacobianL jacobian_L(const TriangulatedSurface& mesh, const ConformalFamily& family,
                     const MetricState& ms);

struct WeightedDelaunayReport {
  VectorXd indicator;            // dK_i/du_j restricted to each edge's two faces
  std::vector<int> violations;   // edges with indicator > tolerance
};

WeightedDelaunayReport weighted_delaunay_indicator(const TriangulatedSurface& mesh,
                                                   const ConformalFamily& family,
                                                   const MetricState& ms,
                                                   double tolerance = 1e-10);

// Hyperbolic circle packing decomposition L = A + B: A diagonal from the
// derivatives of incident triangle areas (via the Glickenstein-Thomas
// formula), B from the angle cross-derivatives with B_ii = -sum_k B_ik.
// Requires eps == 1, hyperbolic background, eta in (-1,1] and the structure
// condition; throws PreconditionViolated otherwise.
struct CirclePackingSplit {
  VectorXd A;   // diagonal entries
  MatrixXd B;
};

CirclePackingSplit decompose_A_B(const TriangulatedSurface& mesh, const StructureFamily& family,
                                 const MetricState& ms);

// d(area of one face)/du at a given vertex, by direct differentiation of the
// angle defect; cross-check for the Glickenstein-Thomas route.
double face_area_derivative_direct(const TriangulatedSurface& mesh,
                                   const ConformalFamily& family, const MetricState& ms,
                                   int face, int slot);

// Closed form for d theta_i^{jk} / d u_j of a hyperbolic circle packing face,
// in terms of radii and edge weights.
double cp_hyperbolic_angle_cross_derivative(double r_i, double r_j, double r_k, double eta_ij,
                                            double eta_ik, double eta_jk);

// |A^2 - (1 + 2 cosh a cosh b cosh c - cosh^2 a - cosh^2 b - cosh^2 c)| with
// A = sinh a sinh b sin(angle between them), for one hyperbolic face.
double area_squared_identity_residual(double l_ij, double l_ik, double l_jk);

} // namespace ccflow

#endif
