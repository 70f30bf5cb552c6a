#include "ccflow/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace ccflow {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::array<double, 3> inner_angles(double a, double b, double c, Background bg) {
  if (!(a > 0 && b > 0 && c > 0))
    throw Error(ErrorCode::DegenerateTriangle, "nonpositive side length");
  if (bg == Background::Euclidean) {
    const double sa = -a + b + c, sb = a - b + c, sc = a + b - c, sp = a + b + c;
    if (!(sa > 0 && sb > 0 && sc > 0))
      throw Error(ErrorCode::DegenerateTriangle, "triangle inequality violated");
    // tan(theta_a/2) = sqrt((s-b)(s-c) / (s(s-a))) with s the semiperimeter.
    const double ta = 2.0 * std::atan2(std::sqrt(sb * sc), std::sqrt(sp * sa));
    const double tb = 2.0 * std::atan2(std::sqrt(sa * sc), std::sqrt(sp * sb));
    const double tc = 2.0 * std::atan2(std::sqrt(sa * sb), std::sqrt(sp * sc));
    return {ta, tb, tc};
  }
  // Hyperbolic half-angle form: with cosh differences factored,
  // theta_a = 2 atan2(sqrt(sinh((a+b-c)/2) sinh((a-b+c)/2)),
  //                   sqrt(sinh((a+b+c)/2) sinh((-a+b+c)/2))).
  const double ha = 0.5 * (-a + b + c), hb = 0.5 * (a - b + c), hc = 0.5 * (a + b - c),
               hp = 0.5 * (a + b + c);
  if (!(ha > 0 && hb > 0 && hc > 0))
    throw Error(ErrorCode::DegenerateTriangle, "triangle inequality violated");
  const double sha = std::sinh(ha), shb = std::sinh(hb), shc = std::sinh(hc),
               shp = std::sinh(hp);
  const double ta = 2.0 * std::atan2(std::sqrt(shb * shc), std::sqrt(shp * sha));
  const double tb = 2.0 * std::atan2(std::sqrt(sha * shc), std::sqrt(shp * shb));
  const double tc = 2.0 * std::atan2(std::sqrt(sha * shb), std::sqrt(shp * shc));
  return {ta, tb, tc};
}

double euclidean_area(double a, double b, double c) {
  // Kahan's stable Heron form; sides sorted a >= b >= c.
  if (a < b) std::swap(a, b);
  if (b < c) std::swap(b, c);
  if (a < b) std::swap(a, b);
  const double t = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
  if (!(t > 0)) throw Error(ErrorCode::DegenerateTriangle, "degenerate Euclidean face");
  return 0.25 * std::sqrt(t);
}

double hyperbolic_area(double theta_a, double theta_b, double theta_c) {
  const double area = kPi - theta_a - theta_b - theta_c;
  if (!(area > 0)) throw Error(ErrorCode::DegenerateTriangle, "angle sum >= pi");
  return area;
}

MetricState compute_metric(const TriangulatedSurface& mesh, const VectorXd& lengths,
                           Background bg) {
  if (lengths.size() != mesh.num_edges())
    throw Error(ErrorCode::DimensionMismatch, "lengths sized to mesh");
  MetricState ms;
  ms.background = bg;
  ms.lengths = lengths;
  ms.angle.resize(mesh.num_halfedges());
  ms.face_area.resize(mesh.num_faces());
  ms.min_angle = std::numeric_limits<double>::infinity();
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto hs = mesh.face_halfedges(f);
    // The angle at corner h is opposite the side edge(next(h)).
    const double l0 = lengths[mesh.edge_of(hs[0])];
    const double l1 = lengths[mesh.edge_of(hs[1])];
    const double l2 = lengths[mesh.edge_of(hs[2])];
    const auto th = inner_angles(l1, l2, l0, bg); // opposite l1, l2, l0
    ms.angle[hs[0]] = th[0];
    ms.angle[hs[1]] = th[1];
    ms.angle[hs[2]] = th[2];
    ms.min_angle = std::min({ms.min_angle, th[0], th[1], th[2]});
    ms.face_area[f] = bg == Background::Euclidean ? euclidean_area(l0, l1, l2)
                                                  : hyperbolic_area(th[0], th[1], th[2]);
  }
  ms.K = curvature(mesh, ms.angle);
  return ms;
}

VectorXd curvature(const TriangulatedSurface& mesh, const VectorXd& corner_angles) {
  VectorXd K = VectorXd::Constant(mesh.num_vertices(), 2.0 * kPi);
  for (int h = 0; h < mesh.num_halfedges(); ++h) K[mesh.origin(h)] -= corner_angles[h];
  return K;
}

double MetricState::gauss_bonnet_residual(int chi) const {
  double r = K.sum() - 2.0 * kPi * chi;
  if (background == Background::Hyperbolic) r -= total_area();
  return r;
}

double flip_diagonal_length(double l_ij, double l_jk, double l_ki, double l_il, double l_lj,
                            Background bg) {
  // t1 = angles opposite (l_jk, l_ki, l_ij) = angles at (i, j, k);
  // t2 = angles opposite (l_lj, l_ij, l_il) = angles at (i, l, j).
  const auto t1 = inner_angles(l_jk, l_ki, l_ij, bg);
  const auto t2 = inner_angles(l_lj, l_ij, l_il, bg);
  const double at_i = t1[0] + t2[0];
  const double at_j = t1[1] + t2[2];
  double phi, p, q;
  if (at_i < kPi) {
    phi = at_i;
    p = l_ki;
    q = l_il;
  } else if (at_j < kPi) {
    phi = at_j;
    p = l_jk;
    q = l_lj;
  } else {
    throw Error(ErrorCode::FoldedQuad, "both shared-edge corners fold past pi");
  }
  if (bg == Background::Euclidean) {
    const double d2 = p * p + q * q - 2.0 * p * q * std::cos(phi);
    return std::sqrt(std::max(d2, 0.0));
  }
  const double ch = std::cosh(p) * std::cosh(q) - std::sinh(p) * std::sinh(q) * std::cos(phi);
  return std::acosh(std::max(ch, 1.0));
}

} // namespace ccflow
