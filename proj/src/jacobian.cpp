#include "ccflow/jacobian.hpp"

#include <cmath>

namespace ccflow {

namespace {

// d theta[corner] / d l[side] for one face. Sides are indexed like halfedges:
// side s runs from slot s to slot s+1, so the side opposite corner c is
// m(c) = (c+1)%3. From the cosine laws, with o_c the opposite-side rate,
//   d theta_c / d l_{m(c)}   =  o_c
//   d theta_c / d l_adjacent = -o_c * cos(theta at the third corner).
Matrix3d angle_length_gradients(const std::array<double, 3>& l,
                                const std::array<double, 3>& theta, Background bg) {
  Matrix3d D;
  if (bg == Background::Euclidean) {
    const double area = euclidean_area(l[0], l[1], l[2]);
    for (int c = 0; c < 3; ++c) {
      const int mc = (c + 1) % 3;
      const double oc = l[mc] / (2.0 * area);
      D(c, mc) = oc;
      // Side c is opposite corner c+2, so the third corner is c+1; side c+2
      // is opposite corner c+1, so the third corner is c+2.
      D(c, c) = -oc * std::cos(theta[(c + 1) % 3]);
      D(c, (c + 2) % 3) = -oc * std::cos(theta[(c + 2) % 3]);
    }
  } else {
    // h = sinh(adjacent) sinh(adjacent') sin(theta) is corner-independent.
    const double h = std::sinh(l[0]) * std::sinh(l[2]) * std::sin(theta[0]);
    for (int c = 0; c < 3; ++c) {
      const int mc = (c + 1) % 3;
      const double oc = std::sinh(l[mc]) / h;
      D(c, mc) = oc;
      D(c, c) = -oc * std::cos(theta[(c + 1) % 3]);
      D(c, (c + 2) % 3) = -oc * std::cos(theta[(c + 2) % 3]);
    }
  }
  return D;
}

} // namespace

Matrix3d angle_gradients(const TriangulatedSurface& mesh, const ConformalFamily& family,
                         const MetricState& ms, int face) {
  const auto hs = mesh.face_halfedges(face);
  const std::array<double, 3> l = {ms.lengths[mesh.edge_of(hs[0])],
                                   ms.lengths[mesh.edge_of(hs[1])],
                                   ms.lengths[mesh.edge_of(hs[2])]};
  const std::array<double, 3> theta = {ms.angle[hs[0]], ms.angle[hs[1]], ms.angle[hs[2]]};
  const Matrix3d D = angle_length_gradients(l, theta, family.background());
  // Chain through dl/du: side s touches slots s (its origin) and s+1 (target).
  Matrix3d dl_du = Matrix3d::Zero(); // (side, slot)
  for (int s = 0; s < 3; ++s) {
    dl_du(s, s) += family.dl_du(mesh, hs[s], true);
    dl_du(s, (s + 1) % 3) += family.dl_du(mesh, hs[s], false);
  }
  return D * dl_du;
}

JacobianL jacobian_L(const TriangulatedSurface& mesh, const ConformalFamily& family,
                     const MetricState& ms) {
  const int n = mesh.num_vertices();
  JacobianL J;
  J.background = family.background();
  J.mat = MatrixXd::Zero(n, n);
  J.edge_cross = VectorXd::Zero(mesh.num_edges());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Matrix3d G = angle_gradients(mesh, family, ms, f);
    const auto hs = mesh.face_halfedges(f);
    const auto vs = mesh.face_vertices(f);
    for (int c = 0; c < 3; ++c)
      for (int b = 0; b < 3; ++b) J.mat(vs[c], vs[b]) -= G(c, b);
    // Cross term of the side s: corners at slots s and s+1.
    for (int s = 0; s < 3; ++s) {
      const int t = (s + 1) % 3;
      J.edge_cross[mesh.edge_of(hs[s])] -= 0.5 * (G(s, t) + G(t, s));
    }
  }
  return J;
}

WeightedDelaunayReport weighted_delaunay_indicator(const TriangulatedSurface& mesh,
                                                   const ConformalFamily& family,
                                                   const MetricState& ms, double tolerance) {
  const JacobianL J = jacobian_L(mesh, family, ms);
  WeightedDelaunayReport rep;
  rep.indicator = J.edge_cross;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (rep.indicator[e] > tolerance) rep.violations.push_back(e);
  return rep;
}

CirclePackingSplit decompose_A_B(const TriangulatedSurface& mesh, const StructureFamily& family,
                                 const MetricState& ms) {
  const DiscreteConformalStructure& dcs = *family.structure();
  if (dcs.background != Background::Hyperbolic)
    throw Error(ErrorCode::PreconditionViolated, "hyperbolic background required");
  for (int i = 0; i < dcs.num_vertices(); ++i)
    if (dcs.epsilon[i] != 1)
      throw Error(ErrorCode::PreconditionViolated, "eps == 1 required");
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (!(dcs.eta[e] > -1.0 && dcs.eta[e] <= 1.0))
      throw Error(ErrorCode::PreconditionViolated, "eta in (-1,1] required");
  if (!check_structure_condition(mesh, dcs.epsilon, dcs.eta).ok())
    throw Error(ErrorCode::PreconditionViolated, "structure condition violated");

  const int n = mesh.num_vertices();
  CirclePackingSplit split;
  split.A = VectorXd::Zero(n);
  split.B = MatrixXd::Zero(n, n);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Matrix3d G = angle_gradients(mesh, family, ms, f);
    const auto hs = mesh.face_halfedges(f);
    const auto vs = mesh.face_vertices(f);
    for (int s = 0; s < 3; ++s) {
      const int t = (s + 1) % 3;
      // Off-diagonal cross derivative of side s; its two halves feed B, and
      // the Glickenstein-Thomas formula turns them into area derivatives:
      // dArea/du_i over faces at i equals sum_j (dtheta_i/du_j)(cosh l_ij - 1),
      // assembled here side by side.
      const double chm1 = std::cosh(ms.lengths[mesh.edge_of(hs[s])]) - 1.0;
      split.B(vs[s], vs[t]) -= G(s, t);
      split.B(vs[t], vs[s]) -= G(t, s);
      split.A[vs[s]] += G(s, t) * chm1; // dtheta_{slot s}/du_{slot t} * (cosh l - 1)
      split.A[vs[t]] += G(t, s) * chm1;
    }
  }
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) row += split.B(i, j);
    split.B(i, i) = -row;
  }
  return split;
}

double face_area_derivative_direct(const TriangulatedSurface& mesh,
                                   const ConformalFamily& family, const MetricState& ms,
                                   int face, int slot) {
  const Matrix3d G = angle_gradients(mesh, family, ms, face);
  // Hyperbolic area is pi minus the angle sum.
  return -(G(0, slot) + G(1, slot) + G(2, slot));
}

double cp_hyperbolic_angle_cross_derivative(double r_i, double r_j, double r_k, double eta_ij,
                                            double eta_ik, double eta_jk) {
  const double Ci = std::cosh(r_i), Cj = std::cosh(r_j), Ck = std::cosh(r_k);
  const double Si = std::sinh(r_i), Sj = std::sinh(r_j), Sk = std::sinh(r_k);
  const double l_ij = cp_length_from_radii(r_i, r_j, eta_ij);
  const double l_ik = cp_length_from_radii(r_i, r_k, eta_ik);
  const double l_jk = cp_length_from_radii(r_j, r_k, eta_jk);
  const auto th = inner_angles(l_jk, l_ik, l_ij, Background::Hyperbolic); // at (i, j, k)
  const double A_ijk = std::sinh(l_ij) * std::sinh(l_ik) * std::sin(th[0]);
  const double gamma_jik = eta_ik + eta_ij * eta_jk;
  const double gamma_ijk = eta_jk + eta_ij * eta_ik;
  const double num = Ck * Si * Si * Sj * Sj * (1.0 - eta_ij * eta_ij) +
                     Ci * Si * Sj * Sj * Sk * gamma_jik + Cj * Si * Si * Sj * Sk * gamma_ijk;
  return num / (A_ijk * std::sinh(l_ij) * std::sinh(l_ij));
}

double area_squared_identity_residual(double l_ij, double l_ik, double l_jk) {
  const auto th = inner_angles(l_jk, l_ik, l_ij, Background::Hyperbolic);
  const double A = std::sinh(l_ij) * std::sinh(l_ik) * std::sin(th[0]);
  const double ca = std::cosh(l_ij), cb = std::cosh(l_ik), cc = std::cosh(l_jk);
  const double rhs = 1.0 + 2.0 * ca * cb * cc - ca * ca - cb * cb - cc * cc;
  return std::abs(A * A - rhs);
}

} // namespace ccflow
