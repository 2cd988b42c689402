#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wlssub/error.hpp"
#include "wlssub/geometry.hpp"
#include "wlssub/mesh.hpp"
#include "wlssub/weights.hpp"
#include "wlssub/wls.hpp"

namespace wlssub {

/// Lattice {l1 e1 + l2 e2 : l in Z^2}.
struct UniformGrid {
  enum class Kind { equilateral, rectangular, custom };

  Point2 e1{1.0, 0.0};
  Point2 e2{0.0, 1.0};
  Kind kind = Kind::rectangular;

  static UniformGrid equilateral() { return {{1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}, Kind::equilateral}; }
  static UniformGrid rectangular() { return {{1.0, 0.0}, {0.0, 1.0}, Kind::rectangular}; }
  static UniformGrid custom(Point2 e1, Point2 e2) {
    const double scale = norm(e1) * norm(e2);
    if (!(std::abs(cross(e1, e2)) > 1e-12 * scale)) {
      throw Error(ErrorCode::invalid_argument, "lattice basis is singular");
    }
    return {e1, e2, Kind::custom};
  }

  double det() const { return cross(e1, e2); }
  Point2 position(double l1, double l2) const { return l1 * e1 + l2 * e2; }

  /// Lattice coordinates of a physical point.
  std::array<double, 2> coordinates(Point2 p) const {
    const double d = det();
    return {cross(p, e2) / d, cross(e1, p) / d};
  }

  /// Smallest singular value of [e1 e2]; |l| <= |position(l)| / sigma_min.
  double sigma_min() const {
    const double a = dot(e1, e1), b = dot(e1, e2), d = dot(e2, e2);
    const double half = (a - d) / 2.0;
    return std::sqrt(std::max(0.0, (a + d) / 2.0 - std::sqrt(half * half + b * b)));
  }

  std::string name() const {
    switch (kind) {
      case Kind::equilateral: return "equilateral";
      case Kind::rectangular: return "rectangular";
      case Kind::custom: return "custom";
    }
    return "custom";
  }
};

/// Vertex index of lattice point (l1, l2) in lattice_patch(grid, n).
inline Index lattice_index(int l1, int l2, int n) {
  return static_cast<Index>((l2 + n) * (2 * n + 1) + (l1 + n));
}

/// Lattice points with |l1|, |l2| <= n, each cell split along its shorter diagonal.
inline Triangulation2 lattice_patch(const UniformGrid& grid, int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "lattice patch half-width must be >= 1");
  std::vector<Point2> vertices;
  vertices.reserve(static_cast<std::size_t>((2 * n + 1) * (2 * n + 1)));
  for (int l2 = -n; l2 <= n; ++l2)
    for (int l1 = -n; l1 <= n; ++l1) vertices.push_back(grid.position(l1, l2));
  const bool anti = norm(grid.e2 - grid.e1) <= norm(grid.e1 + grid.e2);
  std::vector<Face> faces;
  faces.reserve(static_cast<std::size_t>(8 * n * n));
  for (int l2 = -n; l2 < n; ++l2) {
    for (int l1 = -n; l1 < n; ++l1) {
      const Index v00 = lattice_index(l1, l2, n), v10 = lattice_index(l1 + 1, l2, n);
      const Index v01 = lattice_index(l1, l2 + 1, n), v11 = lattice_index(l1 + 1, l2 + 1, n);
      if (anti) {
        faces.push_back({v00, v10, v01});
        faces.push_back({v10, v11, v01});
      } else {
        faces.push_back({v00, v10, v11});
        faces.push_back({v00, v11, v01});
      }
    }
  }
  return Triangulation2(std::move(vertices), std::move(faces));
}

/// Distance from the origin to the boundary of lattice_patch(grid, n).
inline double lattice_patch_inradius(const UniformGrid& grid, int n) {
  return n * std::abs(grid.det()) / std::max(norm(grid.e1), norm(grid.e2));
}

using LatticeOffset = std::array<int, 2>;

/// Complete coefficient table of a stationary scheme on a uniform grid.
///
/// Entry m holds a_m, with z^{k+1}_l = sum_i a_{l - 2i} z^k_i. The parity of m
/// picks the rule: (0,0) replacement, (1,0), (0,1), (1,1) insertions.
class Mask {
 public:
  struct Term {
    LatticeOffset source;  // i, relative to the class representative
    double coefficient;
  };

  void set(LatticeOffset m, double value) { entries_[m] = value; }

  double at(LatticeOffset m) const {
    const auto it = entries_.find(m);
    return it == entries_.end() ? 0.0 : it->second;
  }

  const std::map<LatticeOffset, double>& entries() const noexcept { return entries_; }

  static constexpr std::array<LatticeOffset, 4> kClasses{{{0, 0}, {1, 0}, {0, 1}, {1, 1}}};

  /// Coefficients of the rule computing the level-1 value at half-lattice
  /// point `parity` from level-0 values.
  std::vector<Term> rule(LatticeOffset parity) const {
    std::vector<Term> out;
    for (const auto& [m, a] : entries_) {
      if (a == 0.0) continue;
      if (mod2(m[0]) != parity[0] || mod2(m[1]) != parity[1]) continue;
      out.push_back({{(parity[0] - m[0]) / 2, (parity[1] - m[1]) / 2}, a});
    }
    return out;
  }

  double rule_sum(LatticeOffset parity) const {
    double s = 0.0;
    for (const auto& t : rule(parity)) s += t.coefficient;
    return s;
  }

  double total() const {
    double s = 0.0;
    for (const auto& [m, a] : entries_) s += a;
    return s;
  }

  int half_extent() const {
    int r = 0;
    for (const auto& [m, a] : entries_)
      if (a != 0.0) r = std::max({r, std::abs(m[0]), std::abs(m[1])});
    return r;
  }

  /// Dense (2R+1)^2 matrix: row r holds m2 = r - R, column c holds m1 = c - R.
  std::vector<std::vector<double>> matrix(int half_extent = -1) const {
    const int r = half_extent < 0 ? this->half_extent() : half_extent;
    std::vector<std::vector<double>> out(2 * r + 1, std::vector<double>(2 * r + 1, 0.0));
    for (int row = 0; row < 2 * r + 1; ++row)
      for (int col = 0; col < 2 * r + 1; ++col) out[row][col] = at({col - r, row - r});
    return out;
  }

  /// Inverse of matrix(): scale * rows, same orientation.
  static Mask from_matrix(const std::vector<std::vector<double>>& rows, double scale = 1.0) {
    const int r = static_cast<int>(rows.size()) / 2;
    Mask mask;
    for (int row = 0; row < static_cast<int>(rows.size()); ++row)
      for (int col = 0; col < static_cast<int>(rows[row].size()); ++col)
        if (rows[row][col] != 0.0) mask.set({col - r, row - r}, scale * rows[row][col]);
    return mask;
  }

  /// True when the nonzero entries fill their bounding box, as a tensor-product
  /// mask would.
  bool support_is_rectangle() const {
    int lo0 = 0, hi0 = 0, lo1 = 0, hi1 = 0;
    std::size_t count = 0;
    bool first = true;
    for (const auto& [m, a] : entries_) {
      if (a == 0.0) continue;
      ++count;
      if (first) {
        lo0 = hi0 = m[0];
        lo1 = hi1 = m[1];
        first = false;
      }
      lo0 = std::min(lo0, m[0]);
      hi0 = std::max(hi0, m[0]);
      lo1 = std::min(lo1, m[1]);
      hi1 = std::max(hi1, m[1]);
    }
    return count == static_cast<std::size_t>(hi0 - lo0 + 1) * static_cast<std::size_t>(hi1 - lo1 + 1);
  }

 private:
  static int mod2(int v) { return ((v % 2) + 2) % 2; }

  std::map<LatticeOffset, double> entries_;
};

/// Rules of the L-ball scheme on the infinite lattice, one per parity class.
/// Fails when a lattice point sits within the guard band of the ball radius,
/// since the stencil is then not determined by L.
inline Mask derive_mask(const UniformGrid& grid, const WeightFunction& w, double L, double guard = 1e-9) {
  if (!(L > 0.0)) throw Error(ErrorCode::invalid_argument, "L must be positive");
  const int bound = static_cast<int>(std::ceil(L / grid.sigma_min())) + 2;
  Mask mask;
  for (const auto& parity : Mask::kClasses) {
    const Point2 center = grid.position(parity[0] / 2.0, parity[1] / 2.0);
    std::vector<Point2> points;
    std::vector<LatticeOffset> index;
    for (int i2 = -bound; i2 <= bound; ++i2) {
      for (int i1 = -bound; i1 <= bound; ++i1) {
        points.push_back(grid.position(i1, i2));
        index.push_back({i1, i2});
      }
    }
    const auto ball = make_ball(points, center, L, w, BallOptions{guard});
    if (ball.fragile > 0) {
      throw Error(ErrorCode::ambiguous_window,
                  "ambiguous stencil window: a lattice point lies on the ball boundary for L = " + std::to_string(L));
    }
    const auto rule = compute_coefficients(ball);
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const auto i = index[rule.members[k]];
      mask.set({parity[0] - 2 * i[0], parity[1] - 2 * i[1]}, rule.coefficients[k]);
    }
  }
  return mask;
}

/// Hat-weight equilateral mask constants a..g as published (a..f are the
/// coefficients themselves; g is the shared denominator).
struct EquilateralHatConstants {
  double a, b, c, d, e, f, g;

  static EquilateralHatConstants at(double L) {
    const double s3 = std::sqrt(3.0), s7 = std::sqrt(7.0);
    const double g = -2.0 * (s3 - 10.0 * L + 2.0 * s7 + 4.0);
    return {(2.0 * L - 3.0) / g, (2.0 * L - s7) / g, (L - 1.0) / (7.0 * L - 6.0), (2.0 * L - s3) / g,
            (2.0 * L - 1.0) / g, L / (7.0 * L - 6.0), g};
  }
};

/// Hat-weight rectangular mask constants a..h as published. Every rule sums
/// to 72, so the coefficients are these values divided by 72.
struct RectangularHatConstants {
  double a, b, c, d, e, f, g, h;

  static RectangularHatConstants at(double L) {
    const double s2 = std::sqrt(2.0), s5 = std::sqrt(5.0), s10 = std::sqrt(10.0);
    return {-18.0 * (2.0 * L - s10) / (s2 - 6.0 * L + 2.0 * s10),
            -18.0 * (2.0 * L - 3.0) / (s5 - 4.0 * L + 2.0),
            -72.0 * (L - s2) / (4.0 * s2 - 9.0 * L + 4.0),
            -18.0 * (2.0 * L - s5) / (s5 - 4.0 * L + 2.0),
            -72.0 * (L - 1.0) / (4.0 * s2 - 9.0 * L + 4.0),
            -18.0 * (2.0 * L - s2) / (s2 - 6.0 * L + 2.0 * s10),
            -18.0 * (2.0 * L - 1.0) / (s5 - 4.0 * L + 2.0),
            -72.0 * L / (4.0 * s2 - 9.0 * L + 4.0)};
  }
};

/// Published masks for {equilateral, rectangular} x {constant, hat}. Hat
/// masks are only defined inside their stencil window of L.
inline Mask published_mask(UniformGrid::Kind grid, WeightFunction::Kind weight, double L = 0.0) {
  using Rows = std::vector<std::vector<double>>;
  if (grid == UniformGrid::Kind::equilateral && weight == WeightFunction::Kind::constant) {
    const Rows m{{0, 0, 0, 7, 7, 7, 7},      {0, 0, 7, 10, 7, 10, 7}, {0, 7, 7, 7, 7, 7, 7},
                 {7, 10, 7, 10, 7, 10, 7},   {7, 7, 7, 7, 7, 7, 0},   {7, 10, 7, 10, 7, 0, 0},
                 {7, 7, 7, 7, 0, 0, 0}};
    return Mask::from_matrix(m, 1.0 / 70.0);
  }
  if (grid == UniformGrid::Kind::rectangular && weight == WeightFunction::Kind::constant) {
    const Rows m{{0, 0, 6, 9, 6, 0, 0}, {0, 8, 9, 8, 9, 8, 0}, {6, 9, 6, 9, 6, 9, 6}, {9, 8, 9, 8, 9, 8, 9},
                 {6, 9, 6, 9, 6, 9, 6}, {0, 8, 9, 8, 9, 8, 0}, {0, 0, 6, 9, 6, 0, 0}};
    return Mask::from_matrix(m, 1.0 / 72.0);
  }
  if (grid == UniformGrid::Kind::equilateral && weight == WeightFunction::Kind::hat) {
    if (!(L > 1.5 && L < std::sqrt(3.0))) {
      throw Error(ErrorCode::invalid_argument, "equilateral hat mask needs 3/2 < L < sqrt(3)");
    }
    const auto k = EquilateralHatConstants::at(L);
    const double a = k.a, b = k.b, c = k.c, d = k.d, e = k.e, f = k.f;
    const Rows m{{0, 0, 0, a, b, b, a}, {0, 0, b, c, d, c, b}, {0, b, d, e, e, d, b}, {a, c, e, f, e, c, a},
                 {b, d, e, e, d, b, 0}, {b, c, d, c, b, 0, 0}, {a, b, b, a, 0, 0, 0}};
    return Mask::from_matrix(m);
  }
  if (grid == UniformGrid::Kind::rectangular && weight == WeightFunction::Kind::hat) {
    if (!(L > std::sqrt(10.0) / 2.0 && L < std::sqrt(13.0) / 2.0)) {
      throw Error(ErrorCode::invalid_argument, "rectangular hat mask needs sqrt(10)/2 < L < sqrt(13)/2");
    }
    const auto k = RectangularHatConstants::at(L);
    const double a = k.a, b = k.b, c = k.c, d = k.d, e = k.e, f = k.f, g = k.g, h = k.h;
    const Rows m{{0, 0, a, b, a, 0, 0}, {0, c, d, e, d, c, 0}, {a, d, f, g, f, d, a}, {b, e, g, h, g, e, b},
                 {a, d, f, g, f, d, a}, {0, c, d, e, d, c, 0}, {0, 0, a, b, a, 0, 0}};
    return Mask::from_matrix(m, 1.0 / 72.0);
  }
  throw Error(ErrorCode::invalid_argument, "no published mask for this grid/weight combination");
}

/// Convex hull (counter-clockwise) of the mask support, mapped to the plane.
/// The basic limit function vanishes outside it.
inline std::vector<Point2> mask_support_polygon(const Mask& mask, const UniformGrid& grid) {
  std::vector<Point2> pts;
  for (const auto& [m, a] : mask.entries())
    if (a != 0.0) pts.push_back(grid.position(m[0], m[1]));
  std::sort(pts.begin(), pts.end(), [](Point2 p, Point2 q) { return p.x < q.x || (p.x == q.x && p.y < q.y); });
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  const double eps = 1e-12;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], pts[i]) <= eps) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && orient(hull[k - 2], hull[k - 1], pts[i - 1]) <= eps) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/// Delta data at the origin of a lattice patch, refined `iterations` times.
/// The patch must keep every ball that can see nonzero data away from the
/// patch boundary; half_width = 0 picks the smallest such patch.
inline DataLevel basic_limit_function(const UniformGrid& grid, const WeightFunction& w, double L, int iterations,
                                      int half_width = 0, const BallOptions& opts = {}) {
  if (iterations < 1) throw Error(ErrorCode::invalid_argument, "iterations must be >= 1");
  const double needed = 3.0 * L;
  const double per_unit = lattice_patch_inradius(grid, 1);
  if (half_width == 0) half_width = static_cast<int>(std::ceil(needed / per_unit)) + 1;
  if (!(lattice_patch_inradius(grid, half_width) > needed)) {
    throw Error(ErrorCode::patch_too_small, "lattice patch of half-width " + std::to_string(half_width) +
                                                " lets the boundary reach the support (needs inradius > 3L)");
  }
  DataLevel data;
  data.tri = lattice_patch(grid, half_width);
  data.values.assign(data.tri.vertex_count(), 0.0);
  data.values[lattice_index(0, 0, half_width)] = 1.0;
  data.base_L = L;
  return subdivide(data, w, iterations, opts);
}

}  // namespace wlssub
