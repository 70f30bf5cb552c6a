#ifndef CCFLOW_CONFORMAL_HPP
#define CCFLOW_CONFORMAL_HPP

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "ccflow/mesh.hpp"

namespace ccflow {

using Eigen::VectorXd;
using Eigen::VectorXi;

enum class Background { Euclidean, Hyperbolic };

const char* background_name(Background bg);

// Discrete conformal structure on a weighted triangulated surface: per-vertex
// weights epsilon in {0,1}, per-edge weights eta, and the conformal factor.
// The canonical coordinate is u (the flow variable); f and, for hyperbolic
// circle packings, the radii r are derived views:
//   Euclidean:            u_i = f_i
//   hyperbolic, eps_i=0:  u_i = f_i
//   hyperbolic, eps_i=1:  u_i = f_i - log(1 + sqrt(1 + e^{2f_i})) < 0,
//                         equivalently u_i = log tanh(r_i/2) with e^{f_i} = sinh r_i.
struct DiscreteConformalStructure {
  Background background = Background::Euclidean;
  VectorXi epsilon; // per vertex, 0 or 1
  VectorXd eta;     // per edge
  VectorXd u;       // per vertex

  int num_vertices() const { return static_cast<int>(epsilon.size()); }
};

struct StructureConditionReport {
  std::vector<int> edge_violations;                 // eps_s eps_t + eta_st <= 0
  std::vector<std::pair<int, int>> corner_violations; // (face, slot of apex q)
  bool ok() const { return edge_violations.empty() && corner_violations.empty(); }
};

StructureConditionReport check_structure_condition(const TriangulatedSurface& mesh,
                                                   const VectorXi& epsilon, const VectorXd& eta);

// u <-> f conversions (per vertex).
double u_from_f(Background bg, int eps, double f);
double f_from_u(Background bg, int eps, double u);
VectorXd u_from_f(Background bg, const VectorXi& epsilon, const VectorXd& f);
VectorXd f_from_u(Background bg, const VectorXi& epsilon, const VectorXd& u);

// Hyperbolic circle packing radius coordinate, r = 2 artanh(e^u), u < 0.
double r_from_u(double u);
double u_from_r(double r);

// Length of one edge from the structure's weights and factors. Throws
// DegenerateLength when the radicand (Euclidean) is <= 0 or the cosh argument
// (hyperbolic) is <= 1.
double edge_length_formula(Background bg, int eps_i, int eps_j, double eta, double f_i,
                           double f_j);

// Derivative of that length with respect to u at the first endpoint.
double edge_length_du(Background bg, int eps_i, int eps_j, double eta, double f_i, double f_j,
                      double length);

// All edge lengths of the mesh under the structure.
VectorXd dcs_lengths(const TriangulatedSurface& mesh, const DiscreteConformalStructure& dcs);

// Hyperbolic circle packing length, cosh l = cosh r_i cosh r_j + eta sinh r_i sinh r_j.
double cp_length_from_radii(double r_i, double r_j, double eta);

// Vertex scaling laws: Euclidean l' = l e^{(u_i+u_j)/2}; hyperbolic
// sinh(l'/2) = sinh(l/2) e^{(u_i+u_j)/2}. Loop edges pick up e^{u_i}.
VectorXd vertex_scale_lengths(const TriangulatedSurface& mesh, const VectorXd& lengths,
                              const VectorXd& u, Background bg);

// Faces violating a triangle inequality (same form in both backgrounds).
std::vector<int> nondegeneracy_check(const TriangulatedSurface& mesh, const VectorXd& lengths);

// Smallest triangle-inequality slack over all faces, relative to the longest
// side of the face. Negative means degenerate.
double min_triangle_slack(const TriangulatedSurface& mesh, const VectorXd& lengths);

// How the conformal factor u acts on the current metric. One instance holds
// the metric state of a flow (per-edge lengths plus whatever bookkeeping the
// family needs) and knows the derivative dl/du used by the curvature Jacobian.
class ConformalFamily {
public:
  virtual ~ConformalFamily() = default;

  virtual Background background() const = 0;
  virtual const VectorXd& lengths() const = 0;

  // Advance the conformal factor by du and update lengths.
  virtual void advance(const TriangulatedSurface& mesh, const VectorXd& du) = 0;

  // d(length of edge(h)) / d(u at the origin or target slot of h).
  virtual double dl_du(const TriangulatedSurface& mesh, int halfedge, bool at_origin) const = 0;

  // Record an edge flip: the mesh already carries the new diagonal; the family
  // stores its transported length (and rewrites eta when it keeps weights).
  virtual void apply_flip(const TriangulatedSurface& mesh_after, int edge, double new_length) = 0;

  // Domain guard, e.g. u < 0 at hyperbolic circle packing vertices. Throws.
  virtual void check_state() const {}

  virtual std::unique_ptr<ConformalFamily> clone() const = 0;

  // Per-vertex radii for hyperbolic circle packing vertices; empty otherwise.
  virtual VectorXd radii() const { return VectorXd(); }

  // Underlying structure when the family keeps one; nullptr for pure scaling.
  virtual const DiscreteConformalStructure* structure() const { return nullptr; }
};

// Family backed by a DiscreteConformalStructure: lengths are regenerated from
// the length formulas after every move. Covers circle packings and mixed
// weights; flips rewrite eta on the new diagonal so the stored length is
// reproduced exactly.
class StructureFamily final : public ConformalFamily {
public:
  StructureFamily(const TriangulatedSurface& mesh, DiscreteConformalStructure dcs);

  Background background() const override { return dcs_.background; }
  const VectorXd& lengths() const override { return lengths_; }
  void advance(const TriangulatedSurface& mesh, const VectorXd& du) override;
  double dl_du(const TriangulatedSurface& mesh, int halfedge, bool at_origin) const override;
  void apply_flip(const TriangulatedSurface& mesh_after, int edge, double new_length) override;
  void check_state() const override;
  std::unique_ptr<ConformalFamily> clone() const override;
  VectorXd radii() const override;
  const DiscreteConformalStructure* structure() const override { return &dcs_; }

private:
  DiscreteConformalStructure dcs_;
  VectorXd lengths_;
};

// Vertex scaling family (eps == 0): the per-edge lengths are the state and u
// acts through the scaling laws. This is the representation used by flows
// with surgery, where no global factor survives retriangulation.
class ScalingFamily final : public ConformalFamily {
public:
  ScalingFamily(Background bg, VectorXd lengths);

  Background background() const override { return bg_; }
  const VectorXd& lengths() const override { return lengths_; }
  void advance(const TriangulatedSurface& mesh, const VectorXd& du) override;
  double dl_du(const TriangulatedSurface& mesh, int halfedge, bool at_origin) const override;
  void apply_flip(const TriangulatedSurface& mesh_after, int edge, double new_length) override;
  std::unique_ptr<ConformalFamily> clone() const override;

private:
  Background bg_;
  VectorXd lengths_;
};

} // namespace ccflow

#endif
