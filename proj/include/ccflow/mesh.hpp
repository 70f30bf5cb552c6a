#ifndef CCFLOW_MESH_HPP
#define CCFLOW_MESH_HPP

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "ccflow/error.hpp"

namespace ccflow {

// Combinatorial triangulated closed surface, stored as a halfedge complex.
//
// The structure is a Delta-complex: loop edges (both endpoints at the same
// vertex) and parallel edges are allowed, which is required for the minimal
// one-vertex triangulations of the torus and genus-2 surface. Faces carry a
// coherent orientation; every edge has exactly two halfedges traversed in
// opposite directions, so any instance of this class is a closed orientable
// surface by construction.
//
// Corners are identified with halfedges: the corner of face(h) sitting at
// origin(h), between the sides edge(h) and edge(prev(h)), opposite the side
// edge(next(h)).
class TriangulatedSurface {
public:
  TriangulatedSurface() = default; // empty; fill via from_faces/from_gluing

  // Builds from a list of oriented vertex triples. Sides are paired greedily:
  // a directed side (u,v) is matched with the earliest unmatched side (v,u).
  // This is unambiguous for simplicial inputs; Delta-complexes with parallel
  // loop edges should use from_gluing to control the pairing.
  static TriangulatedSurface from_faces(const std::vector<std::array<int, 3>>& faces,
                                        int num_vertices = -1);

  // Builds from faces plus an explicit side pairing. side_pairs entries are
  // ((face_a, side_a), (face_b, side_b)); side s of face f is the directed
  // segment from slot s to slot (s+1)%3. Every side must appear exactly once.
  static TriangulatedSurface from_gluing(
      int num_vertices, const std::vector<std::array<int, 3>>& faces,
      const std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>>& side_pairs);

  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return static_cast<int>(edge_half_.size()); }
  int num_faces() const { return static_cast<int>(face_half_.size()); }
  int num_halfedges() const { return static_cast<int>(next_.size()); }

  int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

  int next(int h) const { return next_[h]; }
  int prev(int h) const { return next_[next_[h]]; }
  int twin(int h) const { return twin_[h]; }
  int origin(int h) const { return origin_[h]; }
  int target(int h) const { return origin_[next_[h]]; }
  int edge_of(int h) const { return edge_[h]; }
  int face_of(int h) const { return face_[h]; }

  int halfedge_of_edge(int e) const { return edge_half_[e]; }
  int halfedge_of_face(int f) const { return face_half_[f]; }

  std::array<int, 3> face_halfedges(int f) const;
  std::array<int, 3> face_vertices(int f) const;
  // Endpoints of an edge, possibly equal for loop edges.
  std::pair<int, int> edge_endpoints(int e) const;
  std::pair<int, int> edge_faces(int e) const;

  // All corners (halfedges) whose origin is v, with multiplicity.
  std::vector<int> corners_at_vertex(int v) const;

  // Combinatorial edge flip: faces (i,j,k),(j,i,l) sharing edge e={ij} are
  // replaced by (i,l,k),(j,k,l) sharing the new edge {kl}. Returns the handle
  // of the replacement edge (the slot of e is reused); all other handles stay
  // valid. Throws DegenerateFlip if both sides of e lie on one face.
  int flip_edge(int e);

  std::vector<std::array<int, 3>> faces() const;

  // Relabel-invariant encoding of (next, twin); two complexes are combinatorially
  // isomorphic iff their canonical forms match.
  std::string canonical_form() const;

  // Checks structural invariants; throws on violation.
  void validate() const;

private:
  void finish_build();

  int num_vertices_ = 0;
  std::vector<int> next_;
  std::vector<int> twin_;
  std::vector<int> origin_;
  std::vector<int> edge_;
  std::vector<int> face_;
  std::vector<int> edge_half_;
  std::vector<int> face_half_;
};

// Named presets: tetra_sphere, icosahedron, one_vertex_torus, genus2_one_vertex,
// flat_torus_4x4.
TriangulatedSurface preset_mesh(const std::string& name);
std::vector<std::string> preset_names();

} // namespace ccflow

#endif
