#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wlssub/error.hpp"
#include "wlssub/geometry.hpp"
#include "wlssub/mesh.hpp"
#include "wlssub/parallel.hpp"
#include "wlssub/spatial_hash.hpp"
#include "wlssub/weights.hpp"
#include "wlssub/wls.hpp"

namespace wlssub {

class Triangulation3 {
 public:
  Triangulation3() = default;
  Triangulation3(std::vector<Point3> vertices, std::vector<Face> faces)
      : vertices_(std::move(vertices)), faces_(std::move(faces)), edges_(edges_of(faces_)) {}

  const std::vector<Point3>& vertices() const noexcept { return vertices_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t face_count() const noexcept { return faces_.size(); }

  friend bool operator==(const Triangulation3&, const Triangulation3&) = default;

 private:
  std::vector<Point3> vertices_;
  std::vector<Face> faces_;
  std::vector<Edge> edges_;
};

inline std::vector<Violation> validate(const Triangulation3& mesh) {
  std::vector<Violation> out;
  const auto n = mesh.vertex_count();
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.faces()[f];
    const std::string where = "face " + std::to_string(f) + ": ";
    if (face[0] >= n || face[1] >= n || face[2] >= n) {
      out.push_back({Violation::Kind::index_out_of_range, f, where + "index out of range"});
      continue;
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      out.push_back({Violation::Kind::duplicate_index, f, where + "duplicate index in face"});
      continue;
    }
    const auto& a = mesh.vertices()[face[0]];
    const auto& b = mesh.vertices()[face[1]];
    const auto& c = mesh.vertices()[face[2]];
    const double l = std::max({distance(a, b), distance(b, c), distance(c, a)});
    if (!(norm(cross(b - a, c - a)) > detail::kDegenerateRelArea * l * l)) {
      out.push_back({Violation::Kind::degenerate_face, f, where + "degenerate face"});
    }
  }
  return out;
}

inline void require_valid(const Triangulation3& mesh) {
  const auto report = validate(mesh);
  if (!report.empty()) {
    std::string msg = report.front().message;
    if (report.size() > 1) msg += " (+" + std::to_string(report.size() - 1) + " more)";
    throw Error(ErrorCode::invalid_mesh, msg);
  }
}

inline double max_edge_length(const Triangulation3& mesh) {
  if (mesh.edges().empty()) throw Error(ErrorCode::invalid_argument, "mesh has no edges");
  double d = 0.0;
  for (const auto& e : mesh.edges()) d = std::max(d, distance(mesh.vertices()[e.a], mesh.vertices()[e.b]));
  return d;
}

struct LocalFrame {
  Point3 origin;
  Point3 b1, b2, b3;

  /// Coordinates of p in the frame.
  Point3 local(Point3 p) const {
    const Point3 d = p - origin;
    return {dot(d, b1), dot(d, b2), dot(d, b3)};
  }
  Point3 global(Point3 q) const { return origin + q.x * b1 + q.y * b2 + q.z * b3; }
};

/// Frame at `origin` from the first two principal directions of {p - origin}.
/// Each direction is signed so its largest-magnitude component is positive
/// (first such component on ties); b3 = b1 x b2.
inline LocalFrame local_frame(std::span<const Point3> neighborhood, Point3 origin) {
  if (neighborhood.size() < 3) {
    throw Error(ErrorCode::degenerate_neighborhood,
                "local frame needs at least 3 points, got " + std::to_string(neighborhood.size()));
  }
  Eigen::Matrix<double, 3, Eigen::Dynamic> m(3, static_cast<Eigen::Index>(neighborhood.size()));
  for (std::size_t j = 0; j < neighborhood.size(); ++j) {
    const Point3 d = neighborhood[j] - origin;
    m.col(static_cast<Eigen::Index>(j)) << d.x, d.y, d.z;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || !(s(1) > 1e-12 * s(0))) {
    throw Error(ErrorCode::degenerate_neighborhood, "neighborhood vectors span fewer than 2 directions");
  }
  auto direction = [&](int c) {
    Eigen::Vector3d u = svd.matrixU().col(c);
    Eigen::Index k = 0;
    for (Eigen::Index i = 1; i < 3; ++i)
      if (std::abs(u(i)) > std::abs(u(k))) k = i;
    if (u(k) < 0.0) u = -u;
    return Point3{u(0), u(1), u(2)};
  };
  LocalFrame f;
  f.origin = origin;
  f.b1 = direction(0);
  f.b2 = direction(1);
  f.b3 = cross(f.b1, f.b2);
  return f;
}

namespace detail {

/// New position for one vertex: ball of radius L around O in 3D, local frame,
/// degree-1 rule on (x, y) -> z in that frame, evaluated at O.
inline Point3 surface_rule(const Triangulation3& mesh, const SpatialHash<Point3>& grid, const VertexFaces& vf,
                           Point3 origin, const WeightFunction& w, double L) {
  const auto members = grid.within(origin, L);
  auto in = [&](Index v) { return std::binary_search(members.begin(), members.end(), v); };
  bool has_face = false;
  for (auto m : members) {
    for (auto f : vf.of(m)) {
      const auto& face = mesh.faces()[f];
      if (in(face[0]) && in(face[1]) && in(face[2])) {
        has_face = true;
        break;
      }
    }
    if (has_face) break;
  }
  if (!has_face) {
    throw Error(ErrorCode::stencil_lacks_face,
                "stencil lacks a face: " + std::to_string(members.size()) + " member(s) within radius " +
                    std::to_string(L));
  }

  std::vector<Point3> pts;
  pts.reserve(members.size());
  for (auto j : members) pts.push_back(mesh.vertices()[j]);
  const LocalFrame frame = local_frame(pts, origin);

  StencilBall ball;
  ball.radius = L;
  ball.members.resize(members.size());
  std::vector<double> heights(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    const Point3 q = frame.local(pts[i]);
    ball.members[i] = static_cast<Index>(i);
    ball.positions.push_back({q.x, q.y});
    ball.weights.push_back(w(distance(pts[i], origin) / L));
    heights[i] = q.z;
  }
  ball = compute_coefficients(std::move(ball));
  return frame.global({0.0, 0.0, apply_rule(ball, heights)});
}

}  // namespace detail

/// One step of surface subdivision: every retained vertex and every edge
/// midpoint is replaced by the local degree-1 fit through its 3D ball.
inline Triangulation3 surface_refine_step(const Triangulation3& mesh, const WeightFunction& w, double L) {
  require_valid(mesh);
  if (!(L > 0.0) || !std::isfinite(L)) throw Error(ErrorCode::invalid_argument, "L must be positive");
  auto topo = midpoint_topology(mesh.faces(), mesh.vertex_count());

  std::vector<Point3> origins = mesh.vertices();
  origins.reserve(topo.map.new_count());
  for (const auto& e : topo.map.parent_edge) origins.push_back(midpoint(mesh.vertices()[e.a], mesh.vertices()[e.b]));

  const SpatialHash<Point3> grid(mesh.vertices(), L);
  const VertexFaces vf(mesh.faces(), mesh.vertex_count());
  std::vector<Point3> out(origins.size());
  parallel_for(origins.size(), [&](std::size_t i) {
    try {
      out[i] = detail::surface_rule(mesh, grid, vf, origins[i], w, L);
    } catch (const Error& e) {
      throw e.at_vertex(i);
    }
  });
  return Triangulation3(std::move(out), std::move(topo.faces));
}

/// Default surface ball radius: 1.6 times the longest edge.
inline double default_surface_L(const Triangulation3& mesh) { return 1.6 * max_edge_length(mesh); }

/// Iterated surface_refine_step; L is halved after every step.
inline Triangulation3 surface_subdivide(const Triangulation3& mesh, const WeightFunction& w, double L,
                                        int iterations) {
  if (iterations < 0) throw Error(ErrorCode::invalid_argument, "iterations must be non-negative");
  Triangulation3 current = mesh;
  for (int k = 0; k < iterations; ++k) current = surface_refine_step(current, w, std::ldexp(L, -k));
  return current;
}

}  // namespace wlssub
