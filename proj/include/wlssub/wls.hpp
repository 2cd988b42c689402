#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wlssub/error.hpp"
#include "wlssub/geometry.hpp"
#include "wlssub/mesh.hpp"
#include "wlssub/parallel.hpp"
#include "wlssub/spatial_hash.hpp"
#include "wlssub/weights.hpp"

namespace wlssub {

struct BallOptions {
  /// Members whose distance is within guard * radius of the ball boundary are
  /// counted as fragile: their membership flips under tiny perturbations.
  double guard = 1e-9;
};

/// One refinement rule: the parent vertices inside the ball around a new
/// vertex, their weights and (once computed) their coefficients.
struct StencilBall {
  Point2 center;
  double radius = 0.0;
  std::vector<Index> members;
  std::vector<Point2> positions;
  std::vector<double> weights;
  std::vector<double> coefficients;
  std::size_t fragile = 0;

  std::size_t size() const noexcept { return members.size(); }
};

struct MuVector {
  std::vector<double> values;
};

/// Ball from an explicit member list; weights are W(|v - center| / radius).
inline StencilBall ball_from_members(std::span<const Point2> points, std::vector<Index> members, Point2 center,
                                     double radius, const WeightFunction& w, const BallOptions& opts = {}) {
  StencilBall ball;
  ball.center = center;
  ball.radius = radius;
  ball.members = std::move(members);
  ball.positions.reserve(ball.members.size());
  ball.weights.reserve(ball.members.size());
  for (auto j : ball.members) {
    const double d = distance(points[j], center);
    if (std::abs(d - radius) <= opts.guard * radius) ++ball.fragile;
    ball.positions.push_back(points[j]);
    ball.weights.push_back(w(d / radius));
  }
  return ball;
}

/// Brute-force ball over a point set (no face requirement).
inline StencilBall make_ball(std::span<const Point2> points, Point2 center, double radius, const WeightFunction& w,
                             const BallOptions& opts = {}) {
  std::vector<Index> members;
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (distance(points[j], center) < radius) members.push_back(static_cast<Index>(j));
  }
  // Points just outside the ball are fragile too.
  StencilBall ball = ball_from_members(points, std::move(members), center, radius, w, opts);
  for (const auto& p : points) {
    const double d = distance(p, center);
    if (d >= radius && d - radius <= opts.guard * radius) ++ball.fragile;
  }
  return ball;
}

/// Builds balls over a fixed parent triangulation, checking that each ball
/// holds a full parent face (otherwise the degree-1 fit is not determined).
class StencilBuilder {
 public:
  StencilBuilder(const Triangulation2& parent, double radius, const WeightFunction& w, BallOptions opts = {})
      : parent_(parent),
        radius_(radius),
        weight_(w),
        opts_(opts),
        grid_(parent.vertices(), radius),
        vertex_faces_(parent.faces(), parent.vertex_count()) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw Error(ErrorCode::invalid_argument, "ball radius must be positive");
  }

  StencilBall build(Point2 center) const {
    // Query slightly past the radius so near-boundary outsiders are counted as fragile.
    const auto candidates = grid_.within(center, radius_ * (1.0 + opts_.guard));
    std::vector<Index> members;
    std::size_t outside_fragile = 0;
    for (auto j : candidates) {
      if (distance(parent_.vertices()[j], center) < radius_) {
        members.push_back(j);
      } else {
        ++outside_fragile;
      }
    }
    if (!contains_face(members)) {
      throw Error(ErrorCode::stencil_lacks_face,
                  "stencil lacks a face: " + std::to_string(members.size()) + " member(s) within radius " +
                      std::to_string(radius_));
    }
    StencilBall ball = ball_from_members(parent_.vertices(), std::move(members), center, radius_, weight_, opts_);
    ball.fragile += outside_fragile;
    return ball;
  }

  double radius() const noexcept { return radius_; }

 private:
  bool contains_face(const std::vector<Index>& members) const {
    auto in = [&](Index v) { return std::binary_search(members.begin(), members.end(), v); };
    for (auto m : members) {
      for (auto f : vertex_faces_.of(m)) {
        const auto& face = parent_.faces()[f];
        if (in(face[0]) && in(face[1]) && in(face[2])) return true;
      }
    }
    return false;
  }

  const Triangulation2& parent_;
  double radius_;
  WeightFunction weight_;
  BallOptions opts_;
  SpatialHash<Point2> grid_;
  VertexFaces vertex_faces_;
};

/// Members and weights of the ball around `new_vertex` over the parent level.
inline StencilBall build_ball(const DataLevel& parent, Point2 new_vertex, const WeightFunction& w,
                              const BallOptions& opts = {}) {
  require_valid(parent);
  return StencilBuilder(parent.tri, parent.radius(), w, opts).build(new_vertex);
}

/// mu_i = sum_{j1<j2} w_j1 w_j2 det|1 1 1; c v_j1 v_j2| det|1 1 1; v_i v_j1 v_j2|.
///
/// With p = v - c the first factor is cross(p_j1, p_j2) and the second is
/// cross(p_j1, p_j2) + cross(p_i, p_j1 - p_j2), so the pair sum collapses to
/// S + cross(p_i, G) with S and G accumulated once over the pairs.
inline MuVector compute_mu(const StencilBall& ball) {
  const std::size_t n = ball.size();
  std::vector<Point2> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = ball.positions[i] - ball.center;
  double s = 0.0;
  Point2 g{};
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double c0 = cross(p[a], p[b]);
      const double k = ball.weights[a] * ball.weights[b] * c0;
      s += k * c0;
      g = g + k * (p[a] - p[b]);
    }
  }
  MuVector mu;
  mu.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) mu.values[i] = s + cross(p[i], g);
  return mu;
}

namespace detail {
inline double ball_scale(const StencilBall& ball) {
  if (ball.radius > 0.0) return ball.radius;
  double r = 0.0;
  for (const auto& v : ball.positions) r = std::max(r, distance(v, ball.center));
  return r;
}
}  // namespace detail

/// True when the weighted centroid of the members is the center (up to
/// rel_tol * sum(w) * radius), so every mu_i is equal.
inline bool centroid_condition(const StencilBall& ball, double rel_tol = 1e-12) {
  Point2 m{};
  double wsum = 0.0;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    m = m + ball.weights[i] * (ball.positions[i] - ball.center);
    wsum += ball.weights[i];
  }
  return norm(m) <= rel_tol * wsum * detail::ball_scale(ball);
}

/// alpha_i = w_i mu_i / sum_j w_j mu_j.
inline std::vector<double> coefficients_via_mu(const StencilBall& ball) {
  const auto mu = compute_mu(ball);
  double denom = 0.0;
  for (std::size_t j = 0; j < ball.size(); ++j) denom += ball.weights[j] * mu.values[j];
  const double scale = detail::ball_scale(ball);
  if (!(std::abs(denom) > 1e-14 * scale * scale * scale * scale)) {
    throw Error(ErrorCode::singular_system, "singular WLS system (collinear stencil)");
  }
  std::vector<double> alpha(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) alpha[i] = ball.weights[i] * mu.values[i] / denom;
  return alpha;
}

/// alpha_i = w_i / sum_j w_j; exact only under the centroid condition.
inline std::vector<double> coefficients_via_centroid(const StencilBall& ball) {
  double wsum = 0.0;
  for (double w : ball.weights) wsum += w;
  std::vector<double> alpha(ball.size());
  for (std::size_t i = 0; i < ball.size(); ++i) alpha[i] = ball.weights[i] / wsum;
  return alpha;
}

inline StencilBall compute_coefficients(StencilBall ball) {
  if (ball.size() == 0) throw Error(ErrorCode::singular_system, "empty stencil");
  ball.coefficients = centroid_condition(ball) ? coefficients_via_centroid(ball) : coefficients_via_mu(ball);
  return ball;
}

/// sum_i alpha_i z_{member_i}.
inline double apply_rule(const StencilBall& ball, std::span<const double> values) {
  double z = 0.0;
  for (std::size_t i = 0; i < ball.size(); ++i) z += ball.coefficients[i] * values[ball.members[i]];
  return z;
}

/// Summary of the rules used for one refinement step.
struct LevelStats {
  int level = 0;  // level of the refined (child) data
  std::size_t vertices = 0;
  std::size_t faces = 0;
  double radius = 0.0;
  std::size_t min_members = 0;
  std::size_t max_members = 0;
  std::size_t fragile_members = 0;
  std::size_t centroid_rules = 0;
  double min_coefficient = 0.0;
  double theta = 0.0;  // max over rules of sum alpha^2
};

/// Sparse row-per-child-vertex matrix of one refinement step.
class RefinementOperator {
 public:
  RefinementOperator() = default;

  std::size_t rows() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const Index> members(std::size_t row) const {
    return {members_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }
  std::span<const double> coefficients(std::size_t row) const {
    return {coefficients_.data() + offsets_[row], offsets_[row + 1] - offsets_[row]};
  }

  std::vector<double> apply(std::span<const double> parent) const {
    if (parent.size() != cols_) throw Error(ErrorCode::invalid_argument, "operator/data size mismatch");
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
      double z = 0.0;
      for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) z += coefficients_[k] * parent[members_[k]];
      out[r] = z;
    }
    return out;
  }

  /// Rules for every point in `targets`, balls taken over `parent`.
  static RefinementOperator build(const Triangulation2& parent, double radius, std::span<const Point2> targets,
                                  const WeightFunction& w, const BallOptions& opts = {}, LevelStats* stats = nullptr) {
    const StencilBuilder builder(parent, radius, w, opts);
    // Only members, coefficients and a few flags survive each rule, which
    // keeps peak memory proportional to the operator itself.
    struct Row {
      std::vector<Index> members;
      std::vector<double> coefficients;
      std::size_t fragile = 0;
      bool centroid = false;
    };
    std::vector<Row> rows(targets.size());
    parallel_for(targets.size(), [&](std::size_t i) {
      try {
        StencilBall b = compute_coefficients(builder.build(targets[i]));
        const bool centroid = centroid_condition(b);
        rows[i] = Row{std::move(b.members), std::move(b.coefficients), b.fragile, centroid};
      } catch (const Error& e) {
        throw e.at_vertex(i);
      }
    });

    RefinementOperator op;
    op.cols_ = parent.vertex_count();
    op.offsets_.reserve(targets.size() + 1);
    op.offsets_.push_back(0);
    LevelStats s;
    s.radius = radius;
    s.min_members = std::numeric_limits<std::size_t>::max();
    s.min_coefficient = std::numeric_limits<double>::infinity();
    for (auto& r : rows) {
      op.members_.insert(op.members_.end(), r.members.begin(), r.members.end());
      op.coefficients_.insert(op.coefficients_.end(), r.coefficients.begin(), r.coefficients.end());
      op.offsets_.push_back(op.members_.size());
      s.min_members = std::min(s.min_members, r.members.size());
      s.max_members = std::max(s.max_members, r.members.size());
      s.fragile_members += r.fragile;
      if (r.centroid) ++s.centroid_rules;
      double sq = 0.0;
      for (double a : r.coefficients) {
        sq += a * a;
        s.min_coefficient = std::min(s.min_coefficient, a);
      }
      s.theta = std::max(s.theta, sq);
      r = Row{};
    }
    if (rows.empty()) s.min_members = 0;
    if (stats) *stats = s;
    return op;
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Index> members_;
  std::vector<double> coefficients_;
  std::size_t cols_ = 0;
};

/// Child mesh plus the operator mapping parent data to child data.
struct RefinementPlan {
  Triangulation2 child;
  RefinementMap map;
  RefinementOperator op;
  LevelStats stats;
};

inline RefinementPlan plan_refinement(const Triangulation2& parent, int level, double base_L, const WeightFunction& w,
                                      const BallOptions& opts = {}) {
  auto [child, map] = midpoint_refine(parent);
  RefinementPlan plan{std::move(child), std::move(map), {}, {}};
  plan.op = RefinementOperator::build(parent, std::ldexp(base_L, -level), plan.child.vertices(), w, opts, &plan.stats);
  plan.stats.level = level + 1;
  plan.stats.vertices = plan.child.vertex_count();
  plan.stats.faces = plan.child.face_count();
  return plan;
}

/// One subdivision step: midpoint-refine the mesh and evaluate the local
/// weighted degree-1 fit at every child vertex.
inline DataLevel refine_step(const DataLevel& parent, const WeightFunction& w, const BallOptions& opts = {},
                             LevelStats* stats = nullptr) {
  require_valid(parent);
  auto plan = plan_refinement(parent.tri, parent.level, parent.base_L, w, opts);
  if (stats) *stats = plan.stats;
  DataLevel child;
  child.values = plan.op.apply(parent.values);
  child.tri = std::move(plan.child);
  child.level = parent.level + 1;
  child.base_L = parent.base_L;
  return child;
}

/// `iterations` refinement steps; per-level statistics go to `log` if given.
inline DataLevel subdivide(const DataLevel& initial, const WeightFunction& w, int iterations,
                           const BallOptions& opts = {}, std::vector<LevelStats>* log = nullptr) {
  if (iterations < 0) throw Error(ErrorCode::invalid_argument, "iterations must be non-negative");
  require_valid(initial);
  DataLevel current = initial;
  for (int k = 0; k < iterations; ++k) {
    LevelStats stats;
    current = refine_step(current, w, opts, &stats);
    if (log) log->push_back(stats);
  }
  return current;
}

/// Default ball radius: 1.6 times the initial mesh diameter.
inline double default_base_L(const Triangulation2& tri) { return 1.6 * diameter(tri); }

}  // namespace wlssub
