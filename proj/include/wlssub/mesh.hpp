#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wlssub/error.hpp"
#include "wlssub/geometry.hpp"

namespace wlssub {

using Index = std::uint32_t;
using Face = std::array<Index, 3>;

/// Unordered vertex pair stored as (min, max).
struct Edge {
  Index a = 0;
  Index b = 0;

  static constexpr Edge make(Index i, Index j) { return i < j ? Edge{i, j} : Edge{j, i}; }
  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

/// Sorted, deduplicated edge set of a face list.
inline std::vector<Edge> edges_of(std::span<const Face> faces) {
  std::vector<Edge> edges;
  edges.reserve(faces.size() * 3);
  for (const auto& f : faces) {
    edges.push_back(Edge::make(f[0], f[1]));
    edges.push_back(Edge::make(f[1], f[2]));
    edges.push_back(Edge::make(f[2], f[0]));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

/// Planar triangulation: vertices, faces, and the derived edge set.
class Triangulation2 {
 public:
  Triangulation2() = default;
  Triangulation2(std::vector<Point2> vertices, std::vector<Face> faces)
      : vertices_(std::move(vertices)), faces_(std::move(faces)), edges_(edges_of(faces_)) {}

  const std::vector<Point2>& vertices() const noexcept { return vertices_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t face_count() const noexcept { return faces_.size(); }

  friend bool operator==(const Triangulation2&, const Triangulation2&) = default;

 private:
  std::vector<Point2> vertices_;
  std::vector<Face> faces_;
  std::vector<Edge> edges_;
};

struct Violation {
  enum class Kind { index_out_of_range, duplicate_index, degenerate_face };
  Kind kind;
  std::size_t face;
  std::string message;
};

namespace detail {
// Faces whose doubled area falls below this fraction of the squared longest
// edge are treated as degenerate.
inline constexpr double kDegenerateRelArea = 1e-12;

template <class P>
bool degenerate(double doubled_area, P a, P b, P c) {
  const double l = std::max({distance(a, b), distance(b, c), distance(c, a)});
  return !(std::abs(doubled_area) > kDegenerateRelArea * l * l);
}
}  // namespace detail

/// Lists every broken Triangulation2 invariant; empty means valid.
inline std::vector<Violation> validate(const Triangulation2& tri) {
  std::vector<Violation> out;
  const auto n = tri.vertex_count();
  for (std::size_t f = 0; f < tri.face_count(); ++f) {
    const auto& face = tri.faces()[f];
    if (face[0] >= n || face[1] >= n || face[2] >= n) {
      out.push_back({Violation::Kind::index_out_of_range, f,
                     "face " + std::to_string(f) + ": index out of range"});
      continue;
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      out.push_back({Violation::Kind::duplicate_index, f,
                     "face " + std::to_string(f) + ": duplicate index in face"});
      continue;
    }
    const auto& v = tri.vertices();
    const Point2 a = v[face[0]], b = v[face[1]], c = v[face[2]];
    if (detail::degenerate(orient(a, b, c), a, b, c)) {
      out.push_back({Violation::Kind::degenerate_face, f,
                     "face " + std::to_string(f) + ": degenerate face"});
    }
  }
  return out;
}

inline void require_valid(const Triangulation2& tri) {
  const auto report = validate(tri);
  if (!report.empty()) {
    std::string msg = report.front().message;
    if (report.size() > 1) msg += " (+" + std::to_string(report.size() - 1) + " more)";
    throw Error(ErrorCode::invalid_mesh, msg);
  }
}

/// Provenance of one midpoint refinement: child vertex old_count + i is the
/// midpoint of parent_edge[i].
struct RefinementMap {
  std::size_t old_count = 0;
  std::vector<Edge> parent_edge;

  std::size_t new_count() const { return old_count + parent_edge.size(); }
};

/// Child connectivity of a midpoint split; shared by planar and surface meshes.
struct MidpointTopology {
  RefinementMap map;
  std::vector<Face> faces;
};

inline MidpointTopology midpoint_topology(std::span<const Face> faces, std::size_t vertex_count) {
  MidpointTopology out;
  out.map.old_count = vertex_count;
  out.map.parent_edge = edges_of(faces);
  const auto& edges = out.map.parent_edge;
  auto mid = [&](Index i, Index j) {
    const auto it = std::lower_bound(edges.begin(), edges.end(), Edge::make(i, j));
    return static_cast<Index>(vertex_count + static_cast<std::size_t>(it - edges.begin()));
  };
  out.faces.reserve(faces.size() * 4);
  for (const auto& f : faces) {
    const Index ab = mid(f[0], f[1]);
    const Index bc = mid(f[1], f[2]);
    const Index ca = mid(f[2], f[0]);
    out.faces.push_back({f[0], ab, ca});
    out.faces.push_back({ab, f[1], bc});
    out.faces.push_back({ca, bc, f[2]});
    out.faces.push_back({ab, bc, ca});
  }
  return out;
}

/// Splits every face into four by inserting edge midpoints. Parent vertices
/// keep their indices; midpoints follow in ascending edge-key order.
inline std::pair<Triangulation2, RefinementMap> midpoint_refine(const Triangulation2& tri) {
  require_valid(tri);
  auto topo = midpoint_topology(tri.faces(), tri.vertex_count());
  std::vector<Point2> vertices = tri.vertices();
  vertices.reserve(topo.map.new_count());
  for (const auto& e : topo.map.parent_edge) {
    vertices.push_back(midpoint(tri.vertices()[e.a], tri.vertices()[e.b]));
  }
  return {Triangulation2(std::move(vertices), std::move(topo.faces)), std::move(topo.map)};
}

/// Longest edge length.
inline double diameter(const Triangulation2& tri) {
  if (tri.edges().empty()) throw Error(ErrorCode::invalid_argument, "diameter of a mesh without edges");
  double d = 0.0;
  for (const auto& e : tri.edges()) d = std::max(d, distance(tri.vertices()[e.a], tri.vertices()[e.b]));
  return d;
}

/// Vertex -> incident faces, compressed rows.
class VertexFaces {
 public:
  VertexFaces(std::span<const Face> faces, std::size_t vertex_count) : offsets_(vertex_count + 1, 0) {
    for (const auto& f : faces)
      for (auto v : f) ++offsets_[v + 1];
    for (std::size_t i = 0; i < vertex_count; ++i) offsets_[i + 1] += offsets_[i];
    faces_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t f = 0; f < faces.size(); ++f)
      for (auto v : faces[f]) faces_[fill[v]++] = static_cast<Index>(f);
  }

  std::span<const Index> of(std::size_t vertex) const {
    return {faces_.data() + offsets_[vertex], offsets_[vertex + 1] - offsets_[vertex]};
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Index> faces_;
};

/// Number of edges at each vertex.
inline std::vector<std::size_t> valences(const Triangulation2& tri) {
  std::vector<std::size_t> out(tri.vertex_count(), 0);
  for (const auto& e : tri.edges()) {
    ++out[e.a];
    ++out[e.b];
  }
  return out;
}

/// Edges used by exactly one face.
inline std::vector<Edge> boundary_edges(std::span<const Face> faces) {
  std::vector<Edge> all;
  all.reserve(faces.size() * 3);
  for (const auto& f : faces) {
    all.push_back(Edge::make(f[0], f[1]));
    all.push_back(Edge::make(f[1], f[2]));
    all.push_back(Edge::make(f[2], f[0]));
  }
  std::sort(all.begin(), all.end());
  std::vector<Edge> out;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j] == all[i]) ++j;
    if (j - i == 1) out.push_back(all[i]);
    i = j;
  }
  return out;
}

inline std::vector<bool> boundary_vertices(const Triangulation2& tri) {
  std::vector<bool> out(tri.vertex_count(), false);
  for (const auto& e : boundary_edges(tri.faces())) out[e.a] = out[e.b] = true;
  return out;
}

inline double distance_to_segment(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + t * ab);
}

/// Distance from each query point to the mesh boundary polyline.
inline std::vector<double> distance_to_boundary(const Triangulation2& tri, std::span<const Point2> queries) {
  const auto boundary = boundary_edges(tri.faces());
  std::vector<double> out(queries.size(), INFINITY);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (const auto& e : boundary) {
      out[q] = std::min(out[q], distance_to_segment(queries[q], tri.vertices()[e.a], tri.vertices()[e.b]));
    }
  }
  return out;
}

/// Functional data attached to a triangulation at subdivision level `level`.
struct DataLevel {
  Triangulation2 tri;
  std::vector<double> values;
  int level = 0;
  double base_L = 1.0;

  /// Ball radius used to refine this level: 2^{-level} base_L.
  double radius() const { return std::ldexp(base_L, -level); }
};

inline void require_valid(const DataLevel& data) {
  require_valid(data.tri);
  if (data.values.size() != data.tri.vertex_count()) {
    throw Error(ErrorCode::invalid_argument,
                "value count " + std::to_string(data.values.size()) + " does not match vertex count " +
                    std::to_string(data.tri.vertex_count()));
  }
  if (data.level < 0) throw Error(ErrorCode::invalid_argument, "negative level");
  if (!(data.base_L > 0.0) || !std::isfinite(data.base_L)) {
    throw Error(ErrorCode::invalid_argument, "base_L must be positive");
  }
}

}  // namespace wlssub
