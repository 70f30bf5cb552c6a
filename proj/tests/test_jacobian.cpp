#include <doctest.h>

#include <cmath>

#include "ccflow/spectral.hpp"
#include "support/oracles.hpp"

using namespace ccflow;
using namespace ccflow::testing;

namespace {

double rel_err(const MatrixXd& a, const MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

double symmetry_residual(const MatrixXd& L) {
  double worst = 0.0;
  for (int i = 0; i < L.rows(); ++i)
    for (int j = 0; j < i; ++j)
      worst = std::max(worst, std::abs(L(i, j) - L(j, i)) / (1.0 + std::abs(L(i, j))));
  return worst;
}

} // namespace

TEST_CASE("angle gradients: Euclidean rows sum to zero, finite differences agree") {
  std::mt19937_64 rng(42);
  for (const char* name : {"tetra_sphere", "one_vertex_torus", "flat_torus_4x4"}) {
    const auto mesh = preset_mesh(name);
    for (int rep = 0; rep < 10; ++rep) {
      const auto cp_e = random_cp_instance(mesh, Background::Euclidean, rng);
      const auto ms = compute_metric(mesh, cp_e.lengths(), Background::Euclidean);
      for (int f = 0; f < mesh.num_faces(); ++f) {
        const Matrix3d G = angle_gradients(mesh, cp_e, ms, f);
        for (int c = 0; c < 3; ++c)
          CHECK(std::abs(G.row(c).sum()) <= 1e-10 * (1.0 + G.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST_CASE("jacobian matches central differences on random instances") {
  std::mt19937_64 rng(7);
  const auto run = [&](const TriangulatedSurface& mesh, const ConformalFamily& fam) {
    const auto ms = compute_metric(mesh, fam.lengths(), fam.background());
    const JacobianL J = jacobian_L(mesh, fam, ms);
    const MatrixXd fd = jacobian_fd_oracle(mesh, fam);
    CHECK(rel_err(J.mat, fd) <= 1e-5);
    CHECK(symmetry_residual(J.mat) <= 1e-10);
    if (fam.background() == Background::Euclidean) {
      CHECK((J.mat * VectorXd::Ones(mesh.num_vertices())).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((fd * VectorXd::Ones(mesh.num_vertices())).cwiseAbs().maxCoeff() <= 1e-6);
    }
  };
  for (const char* name : {"tetra_sphere", "icosahedron"}) {
    const auto mesh = preset_mesh(name);
    for (int rep = 0; rep < 10; ++rep) {
      run(mesh, random_cp_instance(mesh, Background::Euclidean, rng));
      run(mesh, random_cp_instance(mesh, Background::Hyperbolic, rng));
      run(mesh, random_mixed_instance(mesh, Background::Euclidean, rng));
      run(mesh, random_mixed_instance(mesh, Background::Hyperbolic, rng));
    }
  }
  for (const char* name : {"one_vertex_torus", "flat_torus_4x4"}) {
    const auto mesh = preset_mesh(name);
    for (int rep = 0; rep < 10; ++rep) {
      run(mesh, random_vs_instance(mesh, Background::Euclidean, rng));
      run(mesh, random_vs_instance(mesh, Background::Hyperbolic, rng));
    }
  }
}

TEST_CASE("equilateral tetra packing spectrum: zero on ones, triple eigenvalue") {
  const auto mesh = preset_mesh("tetra_sphere");
  DiscreteConformalStructure dcs;
  dcs.background = Background::Euclidean;
  dcs.epsilon = VectorXi::Ones(4);
  dcs.eta = VectorXd::Ones(mesh.num_edges());
  dcs.u = VectorXd::Zero(4);
  const StructureFamily fam(mesh, dcs);
  const auto ms = compute_metric(mesh, fam.lengths(), Background::Euclidean);
  const auto spec = spectral_decompose(jacobian_L(mesh, fam, ms));
  CHECK(spec.lambda[3] == 0.0);
  CHECK(spec.lambda[0] > 0.0);
  CHECK(spec.lambda[0] == doctest::Approx(spec.lambda[1]).epsilon(1e-10));
  CHECK(spec.lambda[1] == doctest::Approx(spec.lambda[2]).epsilon(1e-10));
}

TEST_CASE("one-vertex torus vertex scaling has the 1x1 zero jacobian") {
  const auto mesh = preset_mesh("one_vertex_torus");
  const ScalingFamily fam(Background::Euclidean, VectorXd::Ones(3));
  const auto ms = compute_metric(mesh, fam.lengths(), Background::Euclidean);
  const JacobianL J = jacobian_L(mesh, fam, ms);
  CHECK(std::abs(J.mat(0, 0)) <= 1e-12);
  CHECK(jacobian_fd_oracle(mesh, fam).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("genus-2 equilateral hyperbolic scaling jacobian is positive") {
  const auto mesh = preset_mesh("genus2_one_vertex");
  const double c = std::cos(std::numbers::pi / 9.0);
  const double l = std::acosh(c / (1.0 - c));
  const ScalingFamily fam(Background::Hyperbolic, VectorXd::Constant(9, l));
  const auto ms = compute_metric(mesh, fam.lengths(), Background::Hyperbolic);
  const auto spec = spectral_decompose(jacobian_L(mesh, fam, ms));
  CHECK(spec.lambda_min() > 0.0);
}

TEST_CASE("closed-form packing angle derivative equals the chain rule") {
  std::mt19937_64 rng(13);
  const auto mesh = preset_mesh("tetra_sphere");
  for (int rep = 0; rep < 200; ++rep) {
    const auto fam = random_cp_instance(mesh, Background::Hyperbolic, rng);
    const auto ms = compute_metric(mesh, fam.lengths(), Background::Hyperbolic);
    const VectorXd r = fam.radii();
    const auto& dcs = *fam.structure();
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const Matrix3d G = angle_gradients(mesh, fam, ms, f);
      const auto hs = mesh.face_halfedges(f);
      const auto vs = mesh.face_vertices(f);
      for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        const double closed = cp_hyperbolic_angle_cross_derivative(
            r[vs[a]], r[vs[b]], r[vs[c]], dcs.eta[mesh.edge_of(hs[a])],
            dcs.eta[mesh.edge_of(hs[c])], dcs.eta[mesh.edge_of(hs[b])]);
        CHECK(std::abs(closed - G(a, b)) <= 1e-9 * (1.0 + std::abs(closed)));
        // Symmetry of the cross derivative.
        CHECK(std::abs(G(a, b) - G(b, a)) <= 1e-10 * (1.0 + std::abs(G(a, b))));
      }
    }
  }
}

TEST_CASE("hyperbolic packing split L = A + B with the stated signs") {
  std::mt19937_64 rng(29);
  for (const char* name : {"tetra_sphere", "icosahedron"}) {
    const auto mesh = preset_mesh(name);
    for (int rep = 0; rep < 20; ++rep) {
      const auto fam = random_cp_instance(mesh, Background::Hyperbolic, rng);
      const auto ms = compute_metric(mesh, fam.lengths(), Background::Hyperbolic);
      const JacobianL J = jacobian_L(mesh, fam, ms);
      const CirclePackingSplit split = decompose_A_B(mesh, fam, ms);

      MatrixXd sum = split.B;
      for (int i = 0; i < mesh.num_vertices(); ++i) sum(i, i) += split.A[i];
      CHECK((sum - J.mat).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + J.mat.cwiseAbs().maxCoeff()));

      for (int i = 0; i < mesh.num_vertices(); ++i) {
        CHECK(split.A[i] >= 0.0);
        for (int j = 0; j < mesh.num_vertices(); ++j)
          if (i != j) CHECK(split.B(i, j) <= 1e-12);
      }

      // A from the Glickenstein-Thomas route equals the direct area derivative.
      for (int i = 0; i < mesh.num_vertices(); ++i) {
        double direct = 0.0;
        for (int f = 0; f < mesh.num_faces(); ++f) {
          const auto vs = mesh.face_vertices(f);
          for (int slot = 0; slot < 3; ++slot)
            if (vs[slot] == i) direct += face_area_derivative_direct(mesh, fam, ms, f, slot);
        }
        CHECK(std::abs(direct - split.A[i]) <= 1e-9 * (1.0 + std::abs(direct)));
      }
    }
  }
}

TEST_CASE("packing split rejects non-packing inputs") {
  std::mt19937_64 rng(47);
  const auto mesh = preset_mesh("tetra_sphere");
  const auto euclid = random_cp_instance(mesh, Background::Euclidean, rng);
  const auto ms = compute_metric(mesh, euclid.lengths(), Background::Euclidean);
  CHECK_THROWS_AS(decompose_A_B(mesh, euclid, ms), Error);

  DiscreteConformalStructure dcs;
  dcs.background = Background::Hyperbolic;
  dcs.epsilon = VectorXi::Ones(4);
  dcs.eta = VectorXd::Constant(mesh.num_edges(), 1.5); // outside (-1, 1]
  dcs.u = VectorXd::Constant(4, u_from_r(1.0));
  const StructureFamily bad_eta(mesh, dcs);
  const auto ms2 = compute_metric(mesh, bad_eta.lengths(), Background::Hyperbolic);
  CHECK_THROWS_AS(decompose_A_B(mesh, bad_eta, ms2), Error);
}

TEST_CASE("Glickenstein-Thomas per-face identity") {
  std::mt19937_64 rng(31);
  const auto mesh = preset_mesh("icosahedron");
  for (int rep = 0; rep < 20; ++rep) {
    const auto fam = random_cp_instance(mesh, Background::Hyperbolic, rng);
    const auto ms = compute_metric(mesh, fam.lengths(), Background::Hyperbolic);
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const Matrix3d G = angle_gradients(mesh, fam, ms, f);
      const auto hs = mesh.face_halfedges(f);
      for (int slot = 0; slot < 3; ++slot) {
        // dArea/du_i = dtheta_j/du_i (cosh l_ij - 1) + dtheta_k/du_i (cosh l_ik - 1)
        // with j, k the other corners and l_ij, l_ik the sides at i.
        const int j = (slot + 1) % 3, k = (slot + 2) % 3;
        const double l_ij = ms.lengths[mesh.edge_of(hs[slot])]; // side slot: i->j
        const double l_ik = ms.lengths[mesh.edge_of(hs[k])];    // side k: k->i
        const double rhs =
            G(j, slot) * (std::cosh(l_ij) - 1.0) + G(k, slot) * (std::cosh(l_ik) - 1.0);
        const double lhs = face_area_derivative_direct(mesh, fam, ms, f, slot);
        CHECK(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(lhs)));
      }
    }
  }
}

TEST_CASE("area-squared identity") {
  // Equilateral with cosh l = 2: both sides equal 1 + 16 - 12 = 5.
  const double l = std::acosh(2.0);
  const auto th = inner_angles(l, l, l, Background::Hyperbolic);
  const double A = std::sinh(l) * std::sinh(l) * std::sin(th[0]);
  CHECK(A * A == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(area_squared_identity_residual(l, l, l) <= 1e-12 * 5.0);

  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 1000; ++rep) {
    const double a = urand(rng, 0.2, 3.0), b = urand(rng, 0.2, 3.0), c = urand(rng, 0.2, 3.0);
    try {
      inner_angles(a, b, c, Background::Hyperbolic);
    } catch (const Error&) {
      continue;
    }
    const double scale = std::pow(std::cosh(std::max({a, b, c})), 3);
    CHECK(area_squared_identity_residual(c, b, a) <= 1e-9 * scale);
  }
}

TEST_CASE("weighted Delaunay indicator") {
  std::mt19937_64 rng(41);

  SUBCASE("Thurston packings never violate it") {
    for (const char* name : {"tetra_sphere", "icosahedron"}) {
      const auto mesh = preset_mesh(name);
      for (int rep = 0; rep < 20; ++rep) {
        DiscreteConformalStructure dcs;
        dcs.background = rep % 2 ? Background::Euclidean : Background::Hyperbolic;
        dcs.epsilon = VectorXi::Ones(mesh.num_vertices());
        dcs.eta.resize(mesh.num_edges());
        for (int e = 0; e < mesh.num_edges(); ++e) dcs.eta[e] = urand(rng, 0.0, 1.0);
        dcs.u.resize(mesh.num_vertices());
        for (int i = 0; i < mesh.num_vertices(); ++i)
          dcs.u[i] = dcs.background == Background::Euclidean ? urand(rng, -1.0, 1.0)
                                                             : u_from_r(urand(rng, 0.3, 3.0));
        const StructureFamily fam(mesh, dcs);
        const auto ms = compute_metric(mesh, fam.lengths(), dcs.background);
        CHECK(weighted_delaunay_indicator(mesh, fam, ms).violations.empty());
      }
    }
  }

  SUBCASE("equilateral torus is weighted Delaunay") {
    const auto mesh = preset_mesh("one_vertex_torus");
    const ScalingFamily fam(Background::Euclidean, VectorXd::Ones(3));
    const auto ms = compute_metric(mesh, fam.lengths(), Background::Euclidean);
    CHECK(weighted_delaunay_indicator(mesh, fam, ms).violations.empty());
  }

  SUBCASE("for vertex scaling it flags exactly the metric Delaunay violations") {
    const auto mesh = preset_mesh("flat_torus_4x4");
    for (int rep = 0; rep < 50; ++rep) {
      const auto fam = random_vs_instance(mesh, Background::Euclidean, rng, 0.8);
      const auto ms = compute_metric(mesh, fam.lengths(), Background::Euclidean);
      const auto weighted = weighted_delaunay_indicator(mesh, fam, ms);
      const auto metric = delaunay_check(mesh, ms);
      for (int e = 0; e < mesh.num_edges(); ++e) {
        if (metric.slack[e] < -1e-8) CHECK(weighted.indicator[e] > 0.0);
        if (metric.slack[e] > 1e-8) CHECK(weighted.indicator[e] < 0.0);
      }
    }
  }
}

TEST_CASE("distant packing circles flatten their angle") {
  // Monotone sampling: with r_j = r_k = 1 fixed, the angle at i decays below
  // 0.1 once r_i is large enough.
  for (double eta : {1.0, 0.5, 0.1}) {
    bool small = false;
    double prev = std::numbers::pi;
    for (int ri = 1; ri <= 30; ++ri) {
      const double l_ij = cp_length_from_radii(ri, 1.0, eta);
      const double l_ik = cp_length_from_radii(ri, 1.0, eta);
      const double l_jk = cp_length_from_radii(1.0, 1.0, eta);
      const double theta = inner_angles(l_jk, l_ik, l_ij, Background::Hyperbolic)[0];
      CHECK(theta <= prev + 1e-9);
      prev = theta;
      if (theta < 0.1) small = true;
    }
    CHECK(small);
  }
}
