#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "wlssub/error.hpp"
#include "wlssub/geom3d.hpp"
#include "wlssub/geometry.hpp"
#include "wlssub/mesh.hpp"

namespace wlssub {

/// Delaunay triangulation (Bowyer-Watson) of distinct points in general
/// enough position. Faces are counter-clockwise.
inline std::vector<Face> delaunay(std::span<const Point2> points) {
  const std::size_t n = points.size();
  if (n < 3) throw Error(ErrorCode::invalid_argument, "delaunay needs at least 3 points");
  Point2 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const Point2 mid = midpoint(lo, hi);
  const double span = std::max({hi.x - lo.x, hi.y - lo.y, 1e-300});

  std::vector<Point2> pts(points.begin(), points.end());
  const double big = 1e4 * span;
  pts.push_back({mid.x - big, mid.y - big});
  pts.push_back({mid.x + big, mid.y - big});
  pts.push_back({mid.x, mid.y + big});

  struct Tri {
    Index v[3];
    Point2 cc;
    double r2;
  };
  auto make = [&](Index a, Index b, Index c) {
    if (orient(pts[a], pts[b], pts[c]) < 0.0) std::swap(b, c);
    const Point2 B = pts[b] - pts[a], C = pts[c] - pts[a];
    const double d = 2.0 * cross(B, C);
    const double b2 = dot(B, B), c2 = dot(C, C);
    const Point2 u{(C.y * b2 - B.y * c2) / d, (B.x * c2 - C.x * b2) / d};
    return Tri{{a, b, c}, pts[a] + u, dot(u, u)};
  };

  std::vector<Tri> tris{make(static_cast<Index>(n), static_cast<Index>(n + 1), static_cast<Index>(n + 2))};
  std::vector<Tri> keep;
  std::vector<Edge> cavity;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = pts[i];
    keep.clear();
    cavity.clear();
    for (const auto& t : tris) {
      const Point2 d = p - t.cc;
      if (dot(d, d) < t.r2) {
        for (int k = 0; k < 3; ++k) cavity.push_back(Edge::make(t.v[k], t.v[(k + 1) % 3]));
      } else {
        keep.push_back(t);
      }
    }
    std::sort(cavity.begin(), cavity.end());
    for (std::size_t a = 0; a < cavity.size();) {
      std::size_t b = a;
      while (b < cavity.size() && cavity[b] == cavity[a]) ++b;
      if (b - a == 1) keep.push_back(make(cavity[a].a, cavity[a].b, static_cast<Index>(i)));
      a = b;
    }
    tris.swap(keep);
  }

  std::vector<Face> faces;
  for (const auto& t : tris) {
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
    faces.push_back({t.v[0], t.v[1], t.v[2]});
  }
  std::sort(faces.begin(), faces.end());
  return faces;
}

namespace detail {

/// Doubled area of the convex hull of the points.
inline double hull_area2(std::span<const Point2> pts) {
  std::vector<Point2> p(pts.begin(), pts.end());
  std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Point2> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && orient(h[k - 2], h[k - 1], p[i]) <= 0.0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && orient(h[k - 2], h[k - 1], p[i]) <= 0.0) --k;
    h[k++] = p[i];
  }
  double area2 = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) area2 += cross(h[i], h[i + 1]);
  return area2;
}

/// A Delaunay mesh is accepted when it is valid, every face is
/// counter-clockwise and the faces tile the convex hull.
inline bool complete_triangulation(const Triangulation2& tri) {
  if (!validate(tri).empty()) return false;
  double area2 = 0.0;
  for (const auto& f : tri.faces()) {
    const double a = orient(tri.vertices()[f[0]], tri.vertices()[f[1]], tri.vertices()[f[2]]);
    if (!(a > 0.0)) return false;
    area2 += a;
  }
  const double hull = hull_area2(tri.vertices());
  return std::abs(area2 - hull) <= 1e-9 * hull;
}

}  // namespace detail

/// Delaunay mesh of `n` uniform random points in `box` plus its four corners.
inline Triangulation2 random_delaunay_mesh(std::size_t n, std::uint64_t seed, Box2 box = {{0.0, 0.0}, {1.0, 1.0}}) {
  for (std::uint32_t attempt = 0; attempt < 100; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), attempt};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x), uy(box.lo.y, box.hi.y);
    std::vector<Point2> pts{box.lo, {box.hi.x, box.lo.y}, box.hi, {box.lo.x, box.hi.y}};
    while (pts.size() < n + 4) pts.push_back({ux(rng), uy(rng)});
    Triangulation2 tri(pts, delaunay(pts));
    if (detail::complete_triangulation(tri)) return tri;
  }
  throw Error(ErrorCode::invalid_mesh, "could not generate a valid random mesh");
}

struct ExperimentMeshSpec {
  double half_width = 3.2;
  std::size_t vertices = 227;
  std::size_t side_points = 11;   // boundary points per side, corners excluded
  double side_jitter = 0.1;       // fraction of the side spacing
  std::size_t candidates = 30;    // best-candidate sampling for the interior
  double min_diameter = 0.78;
  double max_diameter = 0.84;
  std::uint32_t max_attempts = 1000;
};

/// Irregular mesh on [-H, H]^2: jittered boundary points, well-spread interior
/// points (best-candidate sampling) and their Delaunay triangulation. Attempts
/// continue until the diameter falls inside the requested band.
inline Triangulation2 experiment_mesh(std::uint64_t seed, const ExperimentMeshSpec& spec = {}) {
  const double H = spec.half_width;
  const std::size_t boundary = 4 * spec.side_points + 4;
  if (spec.vertices <= boundary) throw Error(ErrorCode::invalid_argument, "too few vertices for the boundary layout");
  for (std::uint32_t attempt = 0; attempt < spec.max_attempts; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), attempt};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> jitter(-spec.side_jitter, spec.side_jitter);
    std::uniform_real_distribution<double> coord(-H, H);

    const double step = 2.0 * H / static_cast<double>(spec.side_points + 1);
    std::vector<Point2> pts;
    pts.reserve(spec.vertices);
    for (std::size_t i = 1; i <= spec.side_points; ++i) {
      const double s = -H + static_cast<double>(i) * step;
      pts.push_back({s + jitter(rng) * step, -H});
      pts.push_back({s + jitter(rng) * step, H});
      pts.push_back({-H, s + jitter(rng) * step});
      pts.push_back({H, s + jitter(rng) * step});
    }
    pts.insert(pts.end(), {{-H, -H}, {H, -H}, {-H, H}, {H, H}});

    while (pts.size() < spec.vertices) {
      Point2 best{};
      double best_d = -1.0;
      for (std::size_t c = 0; c < spec.candidates; ++c) {
        const Point2 q{coord(rng), coord(rng)};
        double d = INFINITY;
        for (const auto& p : pts) d = std::min(d, distance(p, q));
        if (d > best_d) {
          best_d = d;
          best = q;
        }
      }
      pts.push_back(best);
    }

    Triangulation2 tri(pts, delaunay(pts));
    if (!detail::complete_triangulation(tri)) continue;
    const double d = diameter(tri);
    if (d >= spec.min_diameter && d <= spec.max_diameter) return tri;
  }
  throw Error(ErrorCode::invalid_mesh, "no experiment mesh within the diameter band after " +
                                           std::to_string(spec.max_attempts) + " attempts");
}

/// Unit icosahedron refined `levels` times by midpoint splitting, with new
/// vertices pushed onto the unit sphere.
inline Triangulation3 icosphere(int levels) {
  if (levels < 0) throw Error(ErrorCode::invalid_argument, "levels must be non-negative");
  const double t = std::numbers::phi;
  std::vector<Point3> v{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p = p / norm(p);
  std::vector<Face> f{{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int k = 0; k < levels; ++k) {
    auto topo = midpoint_topology(f, v.size());
    for (const auto& e : topo.map.parent_edge) {
      const Point3 m = midpoint(v[e.a], v[e.b]);
      v.push_back(m / norm(m));
    }
    f = std::move(topo.faces);
  }
  return Triangulation3(std::move(v), std::move(f));
}

/// Torus with major radius R and minor radius r, sampled on an nu x nv grid.
inline Triangulation3 torus(double R, double r, std::size_t nu, std::size_t nv) {
  if (nu < 3 || nv < 3 || !(r > 0.0) || !(R > r)) throw Error(ErrorCode::invalid_argument, "invalid torus parameters");
  std::vector<Point3> v;
  v.reserve(nu * nv);
  const double tau = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < nu; ++i) {
    const double u = tau * static_cast<double>(i) / static_cast<double>(nu);
    for (std::size_t j = 0; j < nv; ++j) {
      const double w = tau * static_cast<double>(j) / static_cast<double>(nv);
      v.push_back({(R + r * std::cos(w)) * std::cos(u), (R + r * std::cos(w)) * std::sin(u), r * std::sin(w)});
    }
  }
  auto id = [&](std::size_t i, std::size_t j) { return static_cast<Index>((i % nu) * nv + (j % nv)); };
  std::vector<Face> f;
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < nv; ++j) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Triangulation3(std::move(v), std::move(f));
}

/// Each vertex moved along its radius by N(0, sigma^2).
inline Triangulation3 radial_noise(const Triangulation3& mesh, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Point3> v = mesh.vertices();
  for (auto& p : v) {
    const double r = norm(p);
    p = p * ((r + sigma * noise(rng)) / r);
  }
  return Triangulation3(std::move(v), mesh.faces());
}

/// Each vertex displaced by isotropic N(0, sigma^2 I).
inline Triangulation3 isotropic_noise(const Triangulation3& mesh, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<Point3> v = mesh.vertices();
  for (auto& p : v) p = p + Point3{noise(rng), noise(rng), noise(rng)};
  return Triangulation3(std::move(v), mesh.faces());
}

/// Root mean square of |p| - 1 over the vertices.
inline double radial_rms(const Triangulation3& mesh) {
  double s = 0.0;
  for (const auto& p : mesh.vertices()) s += (norm(p) - 1.0) * (norm(p) - 1.0);
  return std::sqrt(s / static_cast<double>(mesh.vertex_count()));
}

}  // namespace wlssub
