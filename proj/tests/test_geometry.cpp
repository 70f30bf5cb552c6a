#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ccflow/geometry.hpp"

using namespace ccflow;

namespace {

constexpr double kPi = std::numbers::pi;

double urand(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// Independent oracle: develop the two triangles in the hyperboloid model
// x^2 + y^2 - z^2 = -1 and take the Minkowski distance between the far
// corners.
double hyperboloid_flip_oracle(double l_ij, double l_jk, double l_ki, double l_il, double l_lj) {
  const auto t1 = inner_angles(l_jk, l_ki, l_ij, Background::Hyperbolic); // at (i,j,k)
  const auto t2 = inner_angles(l_lj, l_ij, l_il, Background::Hyperbolic); // at (i,l,j)
  // Place i at the apex, j along the first geodesic.
  const std::array<double, 3> k_pt = {std::sinh(l_ki) * std::cos(t1[0]),
                                      std::sinh(l_ki) * std::sin(t1[0]), std::cosh(l_ki)};
  const std::array<double, 3> l_pt = {std::sinh(l_il) * std::cos(t2[0]),
                                      -std::sinh(l_il) * std::sin(t2[0]), std::cosh(l_il)};
  const double minkowski =
      k_pt[2] * l_pt[2] - k_pt[0] * l_pt[0] - k_pt[1] * l_pt[1];
  return std::acosh(minkowski);
}

// Planar development oracle for the Euclidean case.
double planar_flip_oracle(double l_ij, double l_jk, double l_ki, double l_il, double l_lj) {
  const auto t1 = inner_angles(l_jk, l_ki, l_ij, Background::Euclidean);
  const auto t2 = inner_angles(l_lj, l_ij, l_il, Background::Euclidean);
  const double kx = l_ki * std::cos(t1[0]), ky = l_ki * std::sin(t1[0]);
  const double lx = l_il * std::cos(t2[0]), ly = -l_il * std::sin(t2[0]);
  return std::hypot(kx - lx, ky - ly);
}

} // namespace

TEST_CASE("inner angle examples") {
  const auto eq = inner_angles(1, 1, 1, Background::Euclidean);
  for (double t : eq) CHECK(t == doctest::Approx(kPi / 3).epsilon(1e-14));

  const auto right = inner_angles(5, 4, 3, Background::Euclidean);
  CHECK(right[0] == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(right[0] + right[1] + right[2] == doctest::Approx(kPi).epsilon(1e-13));

  // Hyperbolic equilateral with cosh l = 2: cos theta = cosh l/(cosh l + 1) = 2/3.
  const double l = std::acosh(2.0);
  const auto hyp = inner_angles(l, l, l, Background::Hyperbolic);
  for (double t : hyp) CHECK(t == doctest::Approx(std::acos(2.0 / 3.0)).epsilon(1e-13));

  CHECK_THROWS_AS(inner_angles(1, 1, 2.5, Background::Euclidean), Error);
  CHECK_THROWS_AS(inner_angles(1, 1, 2.0, Background::Euclidean), Error);
}

TEST_CASE("hyperbolic area") {
  const double theta = std::acos(2.0 / 3.0);
  CHECK(hyperbolic_area(theta, theta, theta) == doctest::Approx(kPi - 3 * theta).epsilon(1e-13));
  CHECK(hyperbolic_area(0.1, 0.1, 0.1) == doctest::Approx(kPi - 0.3).epsilon(1e-13));
  CHECK_THROWS_AS(hyperbolic_area(1.1, 1.1, 1.1), Error);
}

TEST_CASE("curvature on equilateral presets") {
  SUBCASE("tetra sphere: K = pi, Gauss-Bonnet 4 pi") {
    const auto mesh = preset_mesh("tetra_sphere");
    const auto ms =
        compute_metric(mesh, VectorXd::Ones(mesh.num_edges()), Background::Euclidean);
    for (int i = 0; i < 4; ++i) CHECK(ms.K[i] == doctest::Approx(kPi).epsilon(1e-13));
    CHECK(ms.gauss_bonnet_residual(2) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("icosahedron: K = pi/3") {
    const auto mesh = preset_mesh("icosahedron");
    const auto ms =
        compute_metric(mesh, VectorXd::Ones(mesh.num_edges()), Background::Euclidean);
    for (int i = 0; i < 12; ++i) CHECK(ms.K[i] == doctest::Approx(kPi / 3).epsilon(1e-12));
  }
  SUBCASE("one-vertex torus: flat") {
    const auto mesh = preset_mesh("one_vertex_torus");
    const auto ms =
        compute_metric(mesh, VectorXd::Ones(mesh.num_edges()), Background::Euclidean);
    CHECK(ms.K[0] == doctest::Approx(0.0).epsilon(1e-13));
  }
  SUBCASE("genus-2 equilateral hyperbolic: flat cone, area = total defect") {
    const auto mesh = preset_mesh("genus2_one_vertex");
    const double c = std::cos(kPi / 9.0);
    const double l = std::acosh(c / (1.0 - c));
    const auto ms =
        compute_metric(mesh, VectorXd::Constant(mesh.num_edges(), l), Background::Hyperbolic);
    CHECK(ms.K[0] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(ms.gauss_bonnet_residual(-2) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(ms.total_area() == doctest::Approx(4.0 * kPi).epsilon(1e-10));
  }
}

TEST_CASE("angle sums and Gauss-Bonnet on random metrics") {
  std::mt19937_64 rng(5);
  for (const char* name : {"tetra_sphere", "icosahedron", "flat_torus_4x4"}) {
    const auto mesh = preset_mesh(name);
    for (int rep = 0; rep < 50; ++rep) {
      VectorXd l(mesh.num_edges());
      for (int e = 0; e < l.size(); ++e) l[e] = urand(rng, 0.8, 1.2);
      if (!nondegeneracy_check(mesh, l).empty()) continue;
      for (Background bg : {Background::Euclidean, Background::Hyperbolic}) {
        const auto ms = compute_metric(mesh, l, bg);
        for (int f = 0; f < mesh.num_faces(); ++f) {
          const auto hs = mesh.face_halfedges(f);
          const double sum = ms.angle[hs[0]] + ms.angle[hs[1]] + ms.angle[hs[2]];
          if (bg == Background::Euclidean)
            CHECK(sum == doctest::Approx(kPi).epsilon(1e-10));
          else
            CHECK(sum < kPi);
        }
        CHECK(std::abs(ms.gauss_bonnet_residual(mesh.euler_characteristic())) <= 1e-9);
      }
    }
  }
}

TEST_CASE("flip diagonal examples") {
  const double s2 = std::sqrt(2.0);
  // Unit square split by its diagonal: the flipped diagonal is the other one.
  CHECK(flip_diagonal_length(s2, 1, 1, 1, 1, Background::Euclidean) ==
        doctest::Approx(s2).epsilon(1e-13));

  // Euclidean kite: (1,1,1) and (2,2,1) over the shared side of length 1.
  const double expect = 0.5 * std::sqrt(3.0) + 0.5 * std::sqrt(15.0);
  CHECK(flip_diagonal_length(1.0, 1.0, 1.0, 2.0, 2.0, Background::Euclidean) ==
        doctest::Approx(expect).epsilon(1e-13));

  // Hyperbolic pair of equilateral triangles with cosh l = 2:
  // cosh d = 4 - 3 cos(2 theta) = 4 + 1/3.
  const double l = std::acosh(2.0);
  const double d = flip_diagonal_length(l, l, l, l, l, Background::Hyperbolic);
  CHECK(std::cosh(d) == doctest::Approx(4.0 + 1.0 / 3.0).epsilon(1e-12));
  CHECK(d == doctest::Approx(hyperboloid_flip_oracle(l, l, l, l, l)).epsilon(1e-12));
}

TEST_CASE("flip diagonal against development oracles, with invariants") {
  std::mt19937_64 rng(99);
  int tested = 0;
  while (tested < 300) {
    // Random valid quadrilateral built from two triangles over a shared edge.
    const double l_ij = urand(rng, 0.3, 2.0);
    const double l_jk = urand(rng, 0.3, 2.0);
    const double l_ki = urand(rng, 0.3, 2.0);
    const double l_il = urand(rng, 0.3, 2.0);
    const double l_lj = urand(rng, 0.3, 2.0);
    try {
      inner_angles(l_jk, l_ki, l_ij, Background::Euclidean);
      inner_angles(l_lj, l_ij, l_il, Background::Euclidean);
    } catch (const Error&) {
      continue;
    }
    ++tested;

    {
      const double d = flip_diagonal_length(l_ij, l_jk, l_ki, l_il, l_lj, Background::Euclidean);
      const double oracle = planar_flip_oracle(l_ij, l_jk, l_ki, l_il, l_lj);
      CHECK(d == doctest::Approx(oracle).epsilon(1e-11));
      // Symmetry under swapping the two triangles and the diagonal roles.
      CHECK(flip_diagonal_length(l_ij, l_il, l_lj, l_jk, l_ki, Background::Euclidean) ==
            doctest::Approx(d).epsilon(1e-11));

      // Area invariance whenever the new diagonal subdivides the quad, i.e.
      // the quad is convex at both shared-edge endpoints. That always holds
      // for surgery flips (opposite angles beyond pi force it).
      const auto t1 = inner_angles(l_jk, l_ki, l_ij, Background::Euclidean);
      const auto t2 = inner_angles(l_lj, l_ij, l_il, Background::Euclidean);
      if (t1[0] + t2[0] < kPi && t1[1] + t2[2] < kPi) {
        const double a_new1 = euclidean_area(d, l_ki, l_il);
        const double a_new2 = euclidean_area(d, l_jk, l_lj);
        const double a_old = euclidean_area(l_ij, l_jk, l_ki) + euclidean_area(l_ij, l_il, l_lj);
        CHECK(a_new1 + a_new2 == doctest::Approx(a_old).epsilon(1e-9));
      }
    }
    {
      std::array<double, 3> o1, o2;
      try {
        o1 = inner_angles(l_jk, l_ki, l_ij, Background::Hyperbolic);
        o2 = inner_angles(l_lj, l_ij, l_il, Background::Hyperbolic);
      } catch (const Error&) {
        continue;
      }
      const double d =
          flip_diagonal_length(l_ij, l_jk, l_ki, l_il, l_lj, Background::Hyperbolic);
      const double oracle = hyperboloid_flip_oracle(l_ij, l_jk, l_ki, l_il, l_lj);
      CHECK(d == doctest::Approx(oracle).epsilon(1e-10));

      // Total angle-defect area is preserved when the new diagonal subdivides
      // the quad.
      if (o1[0] + o2[0] < kPi && o1[1] + o2[2] < kPi) {
        const auto n1 = inner_angles(d, l_ki, l_il, Background::Hyperbolic);
        const auto n2 = inner_angles(d, l_jk, l_lj, Background::Hyperbolic);
        const double area_new = hyperbolic_area(n1[0], n1[1], n1[2]) +
                                hyperbolic_area(n2[0], n2[1], n2[2]);
        const double area_old = hyperbolic_area(o1[0], o1[1], o1[2]) +
                                hyperbolic_area(o2[0], o2[1], o2[2]);
        CHECK(area_new == doctest::Approx(area_old).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("Delaunay-flip duality") {
  // If the opposite angles across the shared edge exceed pi, the flipped
  // configuration satisfies the Delaunay condition at the new edge.
  std::mt19937_64 rng(123);
  int tested = 0;
  while (tested < 200) {
    const double l_ij = urand(rng, 1.0, 2.0);
    const double l_jk = urand(rng, 0.55, 1.3);
    const double l_ki = urand(rng, 0.55, 1.3);
    const double l_il = urand(rng, 0.55, 1.3);
    const double l_lj = urand(rng, 0.55, 1.3);
    std::array<double, 3> t1, t2;
    try {
      t1 = inner_angles(l_jk, l_ki, l_ij, Background::Euclidean);
      t2 = inner_angles(l_lj, l_ij, l_il, Background::Euclidean);
    } catch (const Error&) {
      continue;
    }
    if (t1[2] + t2[1] <= kPi) continue; // angles at k and l
    ++tested;
    const double d = flip_diagonal_length(l_ij, l_jk, l_ki, l_il, l_lj, Background::Euclidean);
    const auto n1 = inner_angles(d, l_ki, l_il, Background::Euclidean);  // (i, k, l)
    const auto n2 = inner_angles(d, l_jk, l_lj, Background::Euclidean);  // (j, k, l)
    CHECK(n1[0] + n2[0] < kPi + 1e-12);
  }
}
