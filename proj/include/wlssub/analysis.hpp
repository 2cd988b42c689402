#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "wlssub/error.hpp"
#include "wlssub/mesh.hpp"
#include "wlssub/uniform_masks.hpp"
#include "wlssub/weights.hpp"
#include "wlssub/wls.hpp"

namespace wlssub {

using ScalarField = std::function<double(Point2)>;

inline std::vector<double> sample(const ScalarField& f, std::span<const Point2> points) {
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = f(points[i]);
  return out;
}

/// p(x, y) = c0 + c1 x + c2 y.
struct LinearPolynomial {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double operator()(Point2 p) const { return c0 + c1 * p.x + c2 * p.y; }
};

/// Max |z_child - p| after one refinement step of samples of p.
inline double check_reproduction(const Triangulation2& tri, const WeightFunction& w, double L,
                                 const ScalarField& p, const BallOptions& opts = {}) {
  DataLevel data{tri, sample(p, tri.vertices()), 0, L};
  const auto child = refine_step(data, w, opts);
  double err = 0.0;
  for (std::size_t i = 0; i < child.tri.vertex_count(); ++i) {
    err = std::max(err, std::abs(child.values[i] - p(child.tri.vertices()[i])));
  }
  return err;
}

inline double check_reproduction(const Triangulation2& tri, const WeightFunction& w, double L, LinearPolynomial p,
                                 const BallOptions& opts = {}) {
  return check_reproduction(tri, w, L, ScalarField(p), opts);
}

/// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

struct RateReport {
  std::vector<double> scales;
  std::vector<double> errors;  // sup error over interior finest vertices
  std::vector<std::size_t> samples;
  double slope = 0.0;          // fitted d log2(error) / d log2(h)
  bool slope_valid = false;    // false when all errors are at round-off level
};

struct RateOptions {
  /// Mesh for scale h is anchor + h * T0; keeps the patch over a fixed point
  /// of F as h shrinks.
  Point2 anchor{};
  /// Vertices closer than margin_factor * h * L to the scaled T0 boundary are
  /// excluded.
  double margin_factor = 2.0;
  BallOptions ball{};
};

/// Subdivides F sampled on anchor + h T0 (ball radius h L) for every h and
/// measures the sup deviation from F at the finest interior vertices.
inline RateReport estimate_approximation_order(const ScalarField& f, const Triangulation2& tri,
                                               std::span<const double> scales, int iterations,
                                               const WeightFunction& w, double L,
                                               const RateOptions& opts = {}) {
  if (scales.size() < 3) throw Error(ErrorCode::invalid_argument, "rate estimation needs at least 3 scales");
  RateReport report;
  for (double h : scales) {
    if (!(h > 0.0)) throw Error(ErrorCode::invalid_argument, "scales must be positive");
    std::vector<Point2> vertices;
    vertices.reserve(tri.vertex_count());
    for (const auto& v : tri.vertices()) vertices.push_back(opts.anchor + h * v);
    DataLevel data{Triangulation2(std::move(vertices), tri.faces()), {}, 0, h * L};
    data.values = sample(f, data.tri.vertices());
    const auto fine = subdivide(data, w, iterations, opts.ball);
    const auto dist = distance_to_boundary(data.tri, fine.tri.vertices());
    double err = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < fine.tri.vertex_count(); ++i) {
      if (dist[i] <= opts.margin_factor * h * L) continue;
      err = std::max(err, std::abs(fine.values[i] - f(fine.tri.vertices()[i])));
      ++count;
    }
    if (count == 0) throw Error(ErrorCode::invalid_argument, "no interior vertices at scale " + std::to_string(h));
    report.scales.push_back(h);
    report.errors.push_back(err);
    report.samples.push_back(count);
  }
  const double max_err = *std::max_element(report.errors.begin(), report.errors.end());
  report.slope_valid = max_err > 1e-11 && std::all_of(report.errors.begin(), report.errors.end(),
                                                       [](double e) { return e > 0.0; });
  if (report.slope_valid) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < report.scales.size(); ++i) {
      lx.push_back(std::log2(report.scales[i]));
      ly.push_back(std::log2(report.errors[i]));
    }
    report.slope = fit_slope(lx, ly);
  }
  return report;
}

using VertexFilter = std::function<bool(Point2)>;

/// max over level-(k+1) rules of sum alpha^2, restricted to vertices accepted
/// by `keep` when given.
inline double theta(const DataLevel& level, const WeightFunction& w, const VertexFilter& keep = {},
                    const BallOptions& opts = {}) {
  require_valid(level);
  const auto plan = plan_refinement(level.tri, level.level, level.base_L, w, opts);
  double out = 0.0;
  for (std::size_t r = 0; r < plan.op.rows(); ++r) {
    if (keep && !keep(plan.child.vertices()[r])) continue;
    double s = 0.0;
    for (double a : plan.op.coefficients(r)) s += a * a;
    out = std::max(out, s);
  }
  return out;
}

/// theta of a stationary scheme: max over the four rules of sum alpha^2.
inline double theta(const Mask& mask) {
  double out = 0.0;
  for (const auto& parity : Mask::kClasses) {
    double s = 0.0;
    for (const auto& t : mask.rule(parity)) s += t.coefficient * t.coefficient;
    out = std::max(out, s);
  }
  return out;
}

struct LevelNoise {
  int level = 0;
  std::size_t vertices = 0;    // vertices measured
  double max_ratio = 0.0;      // max empirical var / input var
  double mean_ratio = 0.0;
  double bound = 0.0;          // theta at level 1, 1 deeper down
  double standard_error = 0.0; // of a sample variance whose true value is `bound`
};

struct NoiseReport {
  double theta = 0.0;             // over the measured level-1 rules
  bool theta_applicable = true;   // false if any rule used has a negative coefficient
  std::size_t trials = 0;
  std::vector<LevelNoise> levels;

  /// max_ratio <= bound + sigmas * standard_error on every level.
  bool within_bound(double sigmas = 3.0) const {
    for (const auto& l : levels)
      if (l.max_ratio > l.bound + sigmas * l.standard_error) return false;
    return true;
  }
};

struct NoiseOptions {
  int levels = 1;
  /// Only vertices at least this far from the T0 boundary are measured;
  /// unset means 2 L.
  std::optional<double> interior_margin;
  BallOptions ball{};
};

/// Monte Carlo: iid N(0, sd^2) data on T0, refined `levels` times; reports the
/// per-vertex variance of the refined values relative to sd^2. Trial t draws
/// from a generator seeded with (seed, t), so reports are reproducible and
/// independent of evaluation order.
inline NoiseReport noise_variance_trial(const Triangulation2& tri, const WeightFunction& w, double L, double noise_sd,
                                        std::size_t trials, std::uint64_t seed, const NoiseOptions& opts = {}) {
  if (trials < 100) throw Error(ErrorCode::invalid_argument, "noise trials need at least 100 repetitions");
  if (!(noise_sd >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise sd must be non-negative");
  if (opts.levels < 1) throw Error(ErrorCode::invalid_argument, "noise trial needs at least one level");
  require_valid(tri);
  const double margin = opts.interior_margin.value_or(2.0 * L);

  std::vector<RefinementPlan> plans;
  plans.reserve(static_cast<std::size_t>(opts.levels));
  std::vector<std::vector<std::size_t>> measured;
  const Triangulation2* current = &tri;
  for (int k = 0; k < opts.levels; ++k) {
    plans.push_back(plan_refinement(*current, k, L, w, opts.ball));
    const auto& child = plans.back().child;
    const auto dist = distance_to_boundary(tri, child.vertices());
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < child.vertex_count(); ++i)
      if (dist[i] >= margin) keep.push_back(i);
    if (keep.empty()) throw Error(ErrorCode::invalid_argument, "no interior vertices to measure");
    measured.push_back(std::move(keep));
    current = &plans.back().child;
  }

  NoiseReport report;
  report.trials = trials;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    for (auto r : measured[k]) {
      double s = 0.0;
      for (double a : plans[k].op.coefficients(r)) {
        if (a < 0.0) report.theta_applicable = false;
        if (k == 0) s += a * a;
      }
      if (k == 0) report.theta = std::max(report.theta, s);
    }
  }

  // Running sums per measured vertex and level, in trial order.
  std::vector<std::vector<double>> sum(plans.size()), sumsq(plans.size());
  for (std::size_t k = 0; k < plans.size(); ++k) {
    sum[k].assign(measured[k].size(), 0.0);
    sumsq[k].assign(measured[k].size(), 0.0);
  }
  std::vector<double> data(tri.vertex_count());
  for (std::size_t t = 0; t < trials; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (auto& z : data) z = noise_sd * noise(rng);
    std::vector<double> values = data;
    for (std::size_t k = 0; k < plans.size(); ++k) {
      values = plans[k].op.apply(values);
      for (std::size_t m = 0; m < measured[k].size(); ++m) {
        const double z = values[measured[k][m]];
        sum[k][m] += z;
        sumsq[k][m] += z * z;
      }
    }
  }

  const double n = static_cast<double>(trials);
  const double var_in = noise_sd * noise_sd;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    LevelNoise l;
    l.level = static_cast<int>(k) + 1;
    l.vertices = measured[k].size();
    l.bound = k == 0 ? report.theta : 1.0;
    l.standard_error = l.bound * std::sqrt(2.0 / (n - 1.0));
    double total = 0.0;
    for (std::size_t m = 0; m < measured[k].size(); ++m) {
      const double mean = sum[k][m] / n;
      const double var = std::max(0.0, (sumsq[k][m] - n * mean * mean) / (n - 1.0));
      const double ratio = var_in > 0.0 ? var / var_in : 0.0;
      l.max_ratio = std::max(l.max_ratio, ratio);
      total += ratio;
    }
    l.mean_ratio = total / static_cast<double>(measured[k].size());
    report.levels.push_back(l);
  }
  return report;
}

struct ErrorMetrics {
  double e2 = 0.0;    // root mean square
  double einf = 0.0;  // max abs
  std::size_t count = 0;
};

/// RMS and max deviation of values from f over the vertices inside `region`.
inline ErrorMetrics error_metrics(std::span<const double> values, const ScalarField& f,
                                  std::span<const Point2> vertices, const Box2& region) {
  if (values.size() != vertices.size()) throw Error(ErrorCode::invalid_argument, "values/vertices size mismatch");
  ErrorMetrics m;
  double sq = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!region.contains(vertices[i])) continue;
    const double d = values[i] - f(vertices[i]);
    sq += d * d;
    m.einf = std::max(m.einf, std::abs(d));
    ++m.count;
  }
  if (m.count == 0) throw Error(ErrorCode::invalid_argument, "error region selects no vertices");
  m.e2 = std::sqrt(sq / static_cast<double>(m.count));
  return m;
}

}  // namespace wlssub
