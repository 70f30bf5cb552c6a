#ifndef CCFLOW_TESTS_ORACLES_HPP
#define CCFLOW_TESTS_ORACLES_HPP

// Test-only oracles and instance generators, kept independent of the library
// code paths they check.

#include <cmath>
#include <random>
#include <string>

#include "ccflow/flow.hpp"
#include "ccflow/jacobian.hpp"

namespace ccflow::testing {

inline double urand(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Central-difference Jacobian dK/du. Each probe recomputes lengths and
// curvature from scratch through the family; nothing is shared with the
// closed-form assembly.
inline MatrixXd jacobian_fd_oracle(const TriangulatedSurface& mesh, const ConformalFamily& family,
                                   double h = 1e-6) {
  const int n = mesh.num_vertices();
  MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    VectorXd du = VectorXd::Zero(n);
    du[j] = h;
    auto plus = family.clone();
    plus->advance(mesh, du);
    const VectorXd K_plus = compute_metric(mesh, plus->lengths(), family.background()).K;
    du[j] = -h;
    auto minus = family.clone();
    minus->advance(mesh, du);
    const VectorXd K_minus = compute_metric(mesh, minus->lengths(), family.background()).K;
    J.col(j) = (K_plus - K_minus) / (2.0 * h);
  }
  return J;
}

// eta in (-1, 1] resampled until the structure condition holds.
inline VectorXd random_cp_eta(const TriangulatedSurface& mesh, std::mt19937_64& rng,
                              double lo = -0.4, double hi = 1.0) {
  const VectorXi eps = VectorXi::Ones(mesh.num_vertices());
  for (int tries = 0; tries < 2000; ++tries) {
    VectorXd eta(mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) eta[e] = urand(rng, lo, hi);
    if (check_structure_condition(mesh, eps, eta).ok()) return eta;
  }
  return VectorXd::Ones(mesh.num_edges());
}

// Circle packing instance (eps == 1) with structure condition; nondegenerate
// by the packing admissibility lemmas.
inline StructureFamily random_cp_instance(const TriangulatedSurface& mesh, Background bg,
                                          std::mt19937_64& rng, double u_range = 1.0) {
  DiscreteConformalStructure dcs;
  dcs.background = bg;
  dcs.epsilon = VectorXi::Ones(mesh.num_vertices());
  dcs.eta = random_cp_eta(mesh, rng);
  dcs.u.resize(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i)
    dcs.u[i] = bg == Background::Euclidean ? urand(rng, -u_range, u_range)
                                           : u_from_r(urand(rng, 0.3, 3.0));
  return StructureFamily(mesh, std::move(dcs));
}

// Vertex scaling instance: equilateral base metric, then rejection-sampled
// scaling moves that keep every face nondegenerate.
inline ScalingFamily random_vs_instance(const TriangulatedSurface& mesh, Background bg,
                                        std::mt19937_64& rng, double u_range = 0.4) {
  const VectorXd base = VectorXd::Ones(mesh.num_edges());
  for (double range = u_range; ; range *= 0.5) {
    VectorXd du(mesh.num_vertices());
    for (int i = 0; i < mesh.num_vertices(); ++i) du[i] = urand(rng, -range, range);
    const VectorXd l = vertex_scale_lengths(mesh, base, du, bg);
    if (nondegeneracy_check(mesh, l).empty() && min_triangle_slack(mesh, l) > 1e-3)
      return ScalingFamily(bg, l);
  }
}

// Mixed-weight instance: alternating eps, positive eta, factors rejection-
// sampled around zero.
inline StructureFamily random_mixed_instance(const TriangulatedSurface& mesh, Background bg,
                                             std::mt19937_64& rng, double u_range = 0.3) {
  DiscreteConformalStructure dcs;
  dcs.background = bg;
  dcs.epsilon.resize(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) dcs.epsilon[i] = i % 2;
  dcs.eta.resize(mesh.num_edges());
  for (double range = u_range; ; range *= 0.5) {
    for (int e = 0; e < mesh.num_edges(); ++e) dcs.eta[e] = urand(rng, 0.3, 1.0);
    VectorXd f(mesh.num_vertices());
    for (int i = 0; i < mesh.num_vertices(); ++i) f[i] = urand(rng, -range, range);
    dcs.u = u_from_f(bg, dcs.epsilon, f);
    if (!check_structure_condition(mesh, dcs.epsilon, dcs.eta).ok()) continue;
    try {
      StructureFamily fam(mesh, dcs);
      if (nondegeneracy_check(mesh, fam.lengths()).empty() &&
          min_triangle_slack(mesh, fam.lengths()) > 1e-3)
        return fam;
    } catch (const Error&) {
    }
  }
}

} // namespace ccflow::testing

#endif
