#include "ccflow/mesh.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

namespace ccflow {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonManifold: return "NonManifold";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::NonOrientable: return "NonOrientable";
    case ErrorCode::DegenerateFlip: return "DegenerateFlip";
    case ErrorCode::InvalidU: return "InvalidU";
    case ErrorCode::InvalidR: return "InvalidR";
    case ErrorCode::DegenerateLength: return "DegenerateLength";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::FoldedQuad: return "FoldedQuad";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::FlipLimitExceeded: return "FlipLimitExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
  }
  return "Unknown";
}

namespace {

void check_face_list(const std::vector<std::array<int, 3>>& faces, int num_vertices) {
  if (faces.empty()) throw Error(ErrorCode::NonManifold, "empty face list");
  for (const auto& f : faces)
    for (int v : f)
      if (v < 0 || v >= num_vertices)
        throw Error(ErrorCode::NonManifold, "vertex index out of range");
}

int infer_num_vertices(const std::vector<std::array<int, 3>>& faces) {
  int n = 0;
  for (const auto& f : faces)
    for (int v : f) n = std::max(n, v + 1);
  return n;
}

} // namespace

TriangulatedSurface TriangulatedSurface::from_faces(const std::vector<std::array<int, 3>>& faces,
                                                    int num_vertices) {
  if (num_vertices < 0) num_vertices = infer_num_vertices(faces);
  check_face_list(faces, num_vertices);

  TriangulatedSurface m;
  m.num_vertices_ = num_vertices;
  const int F = static_cast<int>(faces.size());
  const int H = 3 * F;
  m.next_.resize(H);
  m.twin_.assign(H, -1);
  m.origin_.resize(H);
  m.edge_.assign(H, -1);
  m.face_.resize(H);
  m.face_half_.resize(F);

  for (int f = 0; f < F; ++f) {
    for (int s = 0; s < 3; ++s) {
      const int h = 3 * f + s;
      m.next_[h] = 3 * f + (s + 1) % 3;
      m.origin_[h] = faces[f][s];
      m.face_[h] = f;
    }
    m.face_half_[f] = 3 * f;
  }

  // Greedy pairing of directed sides (u,v) with unmatched sides (v,u).
  std::map<std::pair<int, int>, std::deque<int>> open;
  for (int h = 0; h < H; ++h) {
    const int u = m.origin_[h];
    const int v = m.origin_[m.next_[h]];
    auto rev = open.find({v, u});
    if (rev != open.end() && !rev->second.empty()) {
      const int mate = rev->second.front();
      rev->second.pop_front();
      m.twin_[h] = mate;
      m.twin_[mate] = h;
    } else {
      open[{u, v}].push_back(h);
    }
  }
  for (int h = 0; h < H; ++h) {
    if (m.twin_[h] >= 0) continue;
    const int u = m.origin_[h];
    const int v = m.origin_[m.next_[h]];
    // An unmatched side with a same-direction partner left over is the
    // signature of an orientation-reversing gluing.
    auto same = open.find({u, v});
    int leftover_same_dir = 0;
    if (same != open.end())
      for (int h2 : same->second)
        if (h2 != h && m.twin_[h2] < 0) ++leftover_same_dir;
    if (leftover_same_dir > 0)
      throw Error(ErrorCode::NonOrientable, "side (" + std::to_string(u) + "," +
                                               std::to_string(v) + ") only pairs with equal direction");
    throw Error(ErrorCode::NonManifold, "unpaired face side (" + std::to_string(u) + "," +
                                            std::to_string(v) + ")");
  }

  m.finish_build();
  return m;
}

TriangulatedSurface TriangulatedSurface::from_gluing(
    int num_vertices, const std::vector<std::array<int, 3>>& faces,
    const std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>>& side_pairs) {
  check_face_list(faces, num_vertices);
  TriangulatedSurface m;
  m.num_vertices_ = num_vertices;
  const int F = static_cast<int>(faces.size());
  const int H = 3 * F;
  m.next_.resize(H);
  m.twin_.assign(H, -1);
  m.origin_.resize(H);
  m.edge_.assign(H, -1);
  m.face_.resize(H);
  m.face_half_.resize(F);
  for (int f = 0; f < F; ++f) {
    for (int s = 0; s < 3; ++s) {
      const int h = 3 * f + s;
      m.next_[h] = 3 * f + (s + 1) % 3;
      m.origin_[h] = faces[f][s];
      m.face_[h] = f;
    }
    m.face_half_[f] = 3 * f;
  }
  for (const auto& [a, b] : side_pairs) {
    auto handle = [&](std::pair<int, int> fs) {
      if (fs.first < 0 || fs.first >= F || fs.second < 0 || fs.second >= 3)
        throw Error(ErrorCode::NonManifold, "side pair out of range");
      return 3 * fs.first + fs.second;
    };
    const int ha = handle(a), hb = handle(b);
    if (ha == hb || m.twin_[ha] >= 0 || m.twin_[hb] >= 0)
      throw Error(ErrorCode::NonManifold, "side glued twice");
    // Orientation compatibility at the label level (vacuous for loop sides).
    if (m.origin_[ha] != m.origin_[m.next_[hb]] || m.origin_[hb] != m.origin_[m.next_[ha]])
      throw Error(ErrorCode::NonOrientable, "side pair directions do not oppose");
    m.twin_[ha] = hb;
    m.twin_[hb] = ha;
  }
  for (int h = 0; h < H; ++h)
    if (m.twin_[h] < 0) throw Error(ErrorCode::NonManifold, "unpaired face side");
  m.finish_build();
  return m;
}

void TriangulatedSurface::finish_build() {
  const int H = num_halfedges();
  // Edge table from twin pairs.
  edge_half_.clear();
  for (int h = 0; h < H; ++h) {
    if (edge_[h] >= 0) continue;
    const int e = static_cast<int>(edge_half_.size());
    edge_[h] = e;
    edge_[twin_[h]] = e;
    edge_half_.push_back(h);
  }
  validate();
}

std::array<int, 3> TriangulatedSurface::face_halfedges(int f) const {
  const int h0 = face_half_[f];
  return {h0, next_[h0], next_[next_[h0]]};
}

std::array<int, 3> TriangulatedSurface::face_vertices(int f) const {
  const auto hs = face_halfedges(f);
  return {origin_[hs[0]], origin_[hs[1]], origin_[hs[2]]};
}

std::pair<int, int> TriangulatedSurface::edge_endpoints(int e) const {
  const int h = edge_half_[e];
  return {origin_[h], target(h)};
}

std::pair<int, int> TriangulatedSurface::edge_faces(int e) const {
  const int h = edge_half_[e];
  return {face_[h], face_[twin_[h]]};
}

std::vector<int> TriangulatedSurface::corners_at_vertex(int v) const {
  std::vector<int> out;
  for (int h = 0; h < num_halfedges(); ++h)
    if (origin_[h] == v) out.push_back(h);
  return out;
}

int TriangulatedSurface::flip_edge(int e) {
  if (e < 0 || e >= num_edges()) throw Error(ErrorCode::DegenerateFlip, "bad edge handle");
  const int ha = edge_half_[e];
  const int hb = twin_[ha];
  const int f0 = face_[ha];
  const int f1 = face_[hb];
  if (f0 == f1)
    throw Error(ErrorCode::DegenerateFlip, "both sides of edge lie on one face");

  // f0 = (ha: i->j, h2: j->k, h3: k->i), f1 = (hb: j->i, h4: i->l, h5: l->j)
  const int h2 = next_[ha], h3 = next_[h2];
  const int h4 = next_[hb], h5 = next_[h4];
  const int k = origin_[h3];
  const int l = origin_[h5];

  // New faces: f0 = (h4: i->l, ha: l->k, h3: k->i), f1 = (h2: j->k, hb: k->l, h5: l->j)
  origin_[ha] = l;
  origin_[hb] = k;
  next_[h4] = ha;
  next_[ha] = h3;
  next_[h3] = h4;
  next_[h2] = hb;
  next_[hb] = h5;
  next_[h5] = h2;
  face_[h4] = f0;
  face_[h2] = f1;
  face_half_[f0] = ha;
  face_half_[f1] = hb;
  return e;
}

std::vector<std::array<int, 3>> TriangulatedSurface::faces() const {
  std::vector<std::array<int, 3>> out(num_faces());
  for (int f = 0; f < num_faces(); ++f) out[f] = face_vertices(f);
  return out;
}

std::string TriangulatedSurface::canonical_form() const {
  const int H = num_halfedges();
  std::string best;
  std::vector<int> canon(H), order;
  order.reserve(H);
  for (int h0 = 0; h0 < H; ++h0) {
    std::fill(canon.begin(), canon.end(), -1);
    order.clear();
    canon[h0] = 0;
    order.push_back(h0);
    for (std::size_t q = 0; q < order.size(); ++q) {
      const int h = order[q];
      for (int nb : {next_[h], twin_[h]}) {
        if (canon[nb] < 0) {
          canon[nb] = static_cast<int>(order.size());
          order.push_back(nb);
        }
      }
    }
    std::ostringstream enc;
    for (int h : order) enc << canon[next_[h]] << ',' << canon[twin_[h]] << ';';
    std::string s = enc.str();
    if (best.empty() || s < best) best = std::move(s);
  }
  return best;
}

void TriangulatedSurface::validate() const {
  const int H = num_halfedges();
  const int F = num_faces();
  const int E = num_edges();
  if (H != 3 * F || 2 * E != 3 * F)
    throw Error(ErrorCode::NonManifold, "halfedge/face/edge counts inconsistent");
  for (int h = 0; h < H; ++h) {
    if (twin_[h] == h || twin_[twin_[h]] != h)
      throw Error(ErrorCode::NonManifold, "twin is not a fixed-point-free involution");
    if (next_[next_[next_[h]]] != h)
      throw Error(ErrorCode::NonManifold, "face ring is not a 3-cycle");
    if (origin_[twin_[h]] != target(h))
      throw Error(ErrorCode::NonOrientable, "twin halfedges do not oppose");
    if (edge_[h] != edge_[twin_[h]] || edge_[h] < 0 || edge_[h] >= E)
      throw Error(ErrorCode::NonManifold, "edge table inconsistent");
    if (face_[next_[h]] != face_[h])
      throw Error(ErrorCode::NonManifold, "face table inconsistent");
  }
  for (int f = 0; f < F; ++f)
    if (face_[face_half_[f]] != f)
      throw Error(ErrorCode::NonManifold, "face anchor inconsistent");
  for (int e = 0; e < E; ++e)
    if (edge_[edge_half_[e]] != e)
      throw Error(ErrorCode::NonManifold, "edge anchor inconsistent");

  // Each vertex link must be a single circle: the outgoing halfedges at a
  // vertex label form exactly one orbit of h -> next(twin(h)).
  std::vector<int> seen(H, 0);
  std::vector<int> orbits_at(num_vertices(), 0);
  for (int h = 0; h < H; ++h) {
    if (seen[h]) continue;
    int c = h;
    do {
      if (origin_[c] != origin_[h])
        throw Error(ErrorCode::NonManifold, "vertex orbit crosses labels");
      seen[c] = 1;
      c = next_[twin_[c]];
    } while (c != h);
    ++orbits_at[origin_[h]];
  }
  for (int v = 0; v < num_vertices(); ++v) {
    if (orbits_at[v] == 0)
      throw Error(ErrorCode::Disconnected, "vertex " + std::to_string(v) + " has no corners");
    if (orbits_at[v] > 1)
      throw Error(ErrorCode::NonManifold,
                  "vertex " + std::to_string(v) + " has a disconnected link");
  }

  // Face connectivity through shared edges.
  std::vector<int> mark(F, 0);
  std::vector<int> stack = {0};
  mark[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int f = stack.back();
    stack.pop_back();
    for (int h : face_halfedges(f)) {
      const int g = face_[twin_[h]];
      if (!mark[g]) {
        mark[g] = 1;
        ++reached;
        stack.push_back(g);
      }
    }
  }
  if (reached != F) throw Error(ErrorCode::Disconnected, "face graph is disconnected");
}

namespace {

TriangulatedSurface make_icosahedron() {
  // 12 vertices, 20 oriented faces.
  const std::vector<std::array<int, 3>> faces = {
      {0, 1, 2},  {0, 2, 3},  {0, 3, 4},  {0, 4, 5},  {0, 5, 1},
      {1, 6, 2},  {2, 6, 7},  {2, 7, 3},  {3, 7, 8},  {3, 8, 4},
      {4, 8, 9},  {4, 9, 5},  {5, 9, 10}, {5, 10, 1}, {1, 10, 6},
      {11, 7, 6}, {11, 8, 7}, {11, 9, 8}, {11, 10, 9}, {11, 6, 10}};
  return TriangulatedSurface::from_faces(faces, 12);
}

TriangulatedSurface make_one_vertex_torus() {
  // Unit square torus split along a diagonal; sides a,b identified, all
  // corners at one vertex. Side s of face f runs slot s -> s+1.
  const std::vector<std::array<int, 3>> faces = {{0, 0, 0}, {0, 0, 0}};
  const std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> pairs = {
      {{0, 0}, {1, 1}}, {{0, 1}, {1, 2}}, {{0, 2}, {1, 0}}};
  return TriangulatedSurface::from_gluing(1, faces, pairs);
}

TriangulatedSurface make_genus2_one_vertex() {
  // Octagon with boundary word a b a^-1 b^-1 c d c^-1 d^-1, fan-triangulated
  // from one corner; all octagon corners are identified to a single vertex.
  const std::vector<std::array<int, 3>> faces(6, {0, 0, 0});
  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> pairs;
  for (int t = 0; t + 1 < 6; ++t) pairs.push_back({{t, 2}, {t + 1, 0}}); // fan diagonals
  pairs.push_back({{0, 0}, {1, 1}});  // a
  pairs.push_back({{0, 1}, {2, 1}});  // b
  pairs.push_back({{3, 1}, {5, 1}});  // c
  pairs.push_back({{4, 1}, {5, 2}});  // d
  return TriangulatedSurface::from_gluing(1, faces, pairs);
}

TriangulatedSurface make_flat_torus(int n) {
  std::vector<std::array<int, 3>> faces;
  auto idx = [n](int i, int j) { return ((i % n + n) % n) * n + ((j % n + n) % n); };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      faces.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
      faces.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
    }
  }
  return TriangulatedSurface::from_faces(faces, n * n);
}

} // namespace

TriangulatedSurface preset_mesh(const std::string& name) {
  if (name == "tetra_sphere")
    return TriangulatedSurface::from_faces({{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}}, 4);
  if (name == "icosahedron") return make_icosahedron();
  if (name == "one_vertex_torus") return make_one_vertex_torus();
  if (name == "genus2_one_vertex") return make_genus2_one_vertex();
  if (name == "flat_torus_4x4") return make_flat_torus(4);
  throw Error(ErrorCode::ParseError, "unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"tetra_sphere", "icosahedron", "one_vertex_torus", "genus2_one_vertex",
          "flat_torus_4x4"};
}

} // namespace ccflow
