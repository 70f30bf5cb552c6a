#include "ccflow/conformal.hpp"

#include <cmath>
#include <limits>

namespace ccflow {

const char* background_name(Background bg) {
  return bg == Background::Euclidean ? "euclidean" : "hyperbolic";
}

StructureConditionReport check_structure_condition(const TriangulatedSurface& mesh,
                                                   const VectorXi& epsilon, const VectorXd& eta) {
  if (epsilon.size() != mesh.num_vertices() || eta.size() != mesh.num_edges())
    throw Error(ErrorCode::DimensionMismatch, "weights sized to mesh");
  StructureConditionReport rep;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto [s, t] = mesh.edge_endpoints(e);
    if (!(epsilon[s] * epsilon[t] + eta[e] > 0.0)) rep.edge_violations.push_back(e);
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto hs = mesh.face_halfedges(f);
    for (int a = 0; a < 3; ++a) {
      // apex q at slot a; st is the opposite side edge(next(h_a)); the two
      // sides at q are edge(h_a) (= qs) and edge(prev(h_a)) (= qt).
      const int q = mesh.origin(hs[a]);
      const double eta_st = eta[mesh.edge_of(hs[(a + 1) % 3])];
      const double eta_qs = eta[mesh.edge_of(hs[a])];
      const double eta_qt = eta[mesh.edge_of(hs[(a + 2) % 3])];
      if (!(epsilon[q] * eta_st + eta_qs * eta_qt >= 0.0)) rep.corner_violations.push_back({f, a});
    }
  }
  return rep;
}

double u_from_f(Background bg, int eps, double f) {
  if (bg == Background::Euclidean || eps == 0) return f;
  // u = (1/2) log((g-1)/(g+1)) with g = sqrt(1+e^{2f}); rewritten as
  // u = f - log(1+g), exact on the whole range and stable for f << 0.
  const double g = std::hypot(1.0, std::exp(f));
  return f - std::log(1.0 + g);
}

double f_from_u(Background bg, int eps, double u) {
  if (bg == Background::Euclidean || eps == 0) return u;
  if (!(u < 0.0)) throw Error(ErrorCode::InvalidU, "hyperbolic packing vertex needs u < 0");
  // e^f = sinh r = 1/(-sinh u)
  return -std::log(-std::sinh(u));
}

VectorXd u_from_f(Background bg, const VectorXi& epsilon, const VectorXd& f) {
  VectorXd u(f.size());
  for (int i = 0; i < f.size(); ++i) u[i] = u_from_f(bg, epsilon[i], f[i]);
  return u;
}

VectorXd f_from_u(Background bg, const VectorXi& epsilon, const VectorXd& u) {
  VectorXd f(u.size());
  for (int i = 0; i < u.size(); ++i) f[i] = f_from_u(bg, epsilon[i], u[i]);
  return f;
}

double r_from_u(double u) {
  if (!(u < 0.0)) throw Error(ErrorCode::InvalidU, "radius coordinate needs u < 0");
  return 2.0 * std::atanh(std::exp(u));
}

double u_from_r(double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidR, "radius must be positive");
  return std::log(std::tanh(0.5 * r));
}

double edge_length_formula(Background bg, int eps_i, int eps_j, double eta, double f_i,
                           double f_j) {
  if (bg == Background::Euclidean) {
    const double s = eps_i * std::exp(2.0 * f_i) + eps_j * std::exp(2.0 * f_j) +
                     2.0 * eta * std::exp(f_i + f_j);
    if (!(s > 0.0)) throw Error(ErrorCode::DegenerateLength, "nonpositive squared length");
    return std::sqrt(s);
  }
  const double gi = eps_i ? std::hypot(1.0, std::exp(f_i)) : 1.0;
  const double gj = eps_j ? std::hypot(1.0, std::exp(f_j)) : 1.0;
  const double x = gi * gj + eta * std::exp(f_i + f_j);
  if (!(x > 1.0)) throw Error(ErrorCode::DegenerateLength, "cosh length <= 1");
  return std::acosh(x);
}

double edge_length_du(Background bg, int eps_i, int eps_j, double eta, double f_i, double f_j,
                      double length) {
  if (bg == Background::Euclidean)
    return (eps_i * std::exp(2.0 * f_i) + eta * std::exp(f_i + f_j)) / length;
  const double gi = eps_i ? std::hypot(1.0, std::exp(f_i)) : 1.0;
  const double gj = eps_j ? std::hypot(1.0, std::exp(f_j)) : 1.0;
  // d cosh(l)/df_i, then df_i/du_i = gi at packing vertices (1 otherwise).
  const double dcosh_df = eps_i * std::exp(2.0 * f_i) * gj / gi + eta * std::exp(f_i + f_j);
  return dcosh_df * gi / std::sinh(length);
}

VectorXd dcs_lengths(const TriangulatedSurface& mesh, const DiscreteConformalStructure& dcs) {
  if (dcs.epsilon.size() != mesh.num_vertices() || dcs.eta.size() != mesh.num_edges() ||
      dcs.u.size() != mesh.num_vertices())
    throw Error(ErrorCode::DimensionMismatch, "structure sized to mesh");
  const VectorXd f = f_from_u(dcs.background, dcs.epsilon, dcs.u);
  VectorXd l(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto [i, j] = mesh.edge_endpoints(e);
    l[e] = edge_length_formula(dcs.background, dcs.epsilon[i], dcs.epsilon[j], dcs.eta[e], f[i],
                               f[j]);
  }
  return l;
}

double cp_length_from_radii(double r_i, double r_j, double eta) {
  const double x =
      std::cosh(r_i) * std::cosh(r_j) + eta * std::sinh(r_i) * std::sinh(r_j);
  if (!(x > 1.0)) throw Error(ErrorCode::DegenerateLength, "cosh length <= 1");
  return std::acosh(x);
}

VectorXd vertex_scale_lengths(const TriangulatedSurface& mesh, const VectorXd& lengths,
                              const VectorXd& u, Background bg) {
  if (lengths.size() != mesh.num_edges() || u.size() != mesh.num_vertices())
    throw Error(ErrorCode::DimensionMismatch, "lengths/u sized to mesh");
  VectorXd out(lengths.size());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto [i, j] = mesh.edge_endpoints(e);
    const double s = std::exp(0.5 * (u[i] + u[j]));
    if (bg == Background::Euclidean)
      out[e] = lengths[e] * s;
    else
      out[e] = 2.0 * std::asinh(std::sinh(0.5 * lengths[e]) * s);
  }
  return out;
}

std::vector<int> nondegeneracy_check(const TriangulatedSurface& mesh, const VectorXd& lengths) {
  std::vector<int> bad;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto hs = mesh.face_halfedges(f);
    const double a = lengths[mesh.edge_of(hs[0])];
    const double b = lengths[mesh.edge_of(hs[1])];
    const double c = lengths[mesh.edge_of(hs[2])];
    if (!(a < b + c && b < c + a && c < a + b)) bad.push_back(f);
  }
  return bad;
}

double min_triangle_slack(const TriangulatedSurface& mesh, const VectorXd& lengths) {
  double worst = std::numeric_limits<double>::infinity();
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto hs = mesh.face_halfedges(f);
    const double a = lengths[mesh.edge_of(hs[0])];
    const double b = lengths[mesh.edge_of(hs[1])];
    const double c = lengths[mesh.edge_of(hs[2])];
    const double m = std::max({a, b, c});
    const double s = std::min({b + c - a, c + a - b, a + b - c}) / m;
    worst = std::min(worst, s);
  }
  return worst;
}

StructureFamily::StructureFamily(const TriangulatedSurface& mesh, DiscreteConformalStructure dcs)
    : dcs_(std::move(dcs)) {
  lengths_ = dcs_lengths(mesh, dcs_);
}

void StructureFamily::advance(const TriangulatedSurface& mesh, const VectorXd& du) {
  dcs_.u += du;
  check_state();
  lengths_ = dcs_lengths(mesh, dcs_);
}

double StructureFamily::dl_du(const TriangulatedSurface& mesh, int h, bool at_origin) const {
  const int i = at_origin ? mesh.origin(h) : mesh.target(h);
  const int j = at_origin ? mesh.target(h) : mesh.origin(h);
  const int e = mesh.edge_of(h);
  const double f_i = f_from_u(dcs_.background, dcs_.epsilon[i], dcs_.u[i]);
  const double f_j = f_from_u(dcs_.background, dcs_.epsilon[j], dcs_.u[j]);
  return edge_length_du(dcs_.background, dcs_.epsilon[i], dcs_.epsilon[j], dcs_.eta[e], f_i, f_j,
                        lengths_[e]);
}

void StructureFamily::apply_flip(const TriangulatedSurface& mesh_after, int edge,
                                 double new_length) {
  // Keep the transported length exact by solving the length formula for eta.
  const auto [k, l] = mesh_after.edge_endpoints(edge);
  const double f_k = f_from_u(dcs_.background, dcs_.epsilon[k], dcs_.u[k]);
  const double f_l = f_from_u(dcs_.background, dcs_.epsilon[l], dcs_.u[l]);
  if (dcs_.background == Background::Euclidean) {
    dcs_.eta[edge] = (new_length * new_length - dcs_.epsilon[k] * std::exp(2.0 * f_k) -
                      dcs_.epsilon[l] * std::exp(2.0 * f_l)) /
                     (2.0 * std::exp(f_k + f_l));
  } else {
    const double gk = dcs_.epsilon[k] ? std::hypot(1.0, std::exp(f_k)) : 1.0;
    const double gl = dcs_.epsilon[l] ? std::hypot(1.0, std::exp(f_l)) : 1.0;
    dcs_.eta[edge] = (std::cosh(new_length) - gk * gl) / std::exp(f_k + f_l);
  }
  lengths_[edge] = new_length;
}

void StructureFamily::check_state() const {
  if (dcs_.background == Background::Hyperbolic)
    for (int i = 0; i < dcs_.num_vertices(); ++i)
      if (dcs_.epsilon[i] == 1 && !(dcs_.u[i] < 0.0))
        throw Error(ErrorCode::InvalidU, "packing vertex left u < 0");
}

std::unique_ptr<ConformalFamily> StructureFamily::clone() const {
  return std::make_unique<StructureFamily>(*this);
}

VectorXd StructureFamily::radii() const {
  VectorXd r(dcs_.num_vertices());
  for (int i = 0; i < dcs_.num_vertices(); ++i)
    r[i] = (dcs_.background == Background::Hyperbolic && dcs_.epsilon[i] == 1)
               ? r_from_u(dcs_.u[i])
               : 0.0;
  return r;
}

ScalingFamily::ScalingFamily(Background bg, VectorXd lengths)
    : bg_(bg), lengths_(std::move(lengths)) {}

void ScalingFamily::advance(const TriangulatedSurface& mesh, const VectorXd& du) {
  lengths_ = vertex_scale_lengths(mesh, lengths_, du, bg_);
}

double ScalingFamily::dl_du(const TriangulatedSurface& mesh, int h, bool) const {
  const double l = lengths_[mesh.edge_of(h)];
  return bg_ == Background::Euclidean ? 0.5 * l : std::tanh(0.5 * l);
}

void ScalingFamily::apply_flip(const TriangulatedSurface&, int edge, double new_length) {
  lengths_[edge] = new_length;
}

std::unique_ptr<ConformalFamily> ScalingFamily::clone() const {
  return std::make_unique<ScalingFamily>(*this);
}

} // namespace ccflow
