// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wlssub/analysis.hpp"
#include "wlssub/baselines.hpp"
#include "wlssub/experiment.hpp"
#include "wlssub/fixtures.hpp"
#include "wlssub/geom3d.hpp"
#include "wlssub/uniform_masks.hpp"
#include "wlssub/wls.hpp"

using namespace wlssub;

namespace {

using Rows = std::vector<std::vector<double>>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double matrix_diff(const Mask& m, const Rows& rows, double scale) {
  const auto a = m.matrix(3);
  double d = m.half_extent() > 3 ? 1.0 : 0.0;
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 7; ++c) d = std::max(d, std::abs(a[r][c] - scale * rows[r][c]));
  return d;
}

Outcome ac1() {
  const Rows eq{{0, 0, 0, 7, 7, 7, 7},    {0, 0, 7, 10, 7, 10, 7}, {0, 7, 7, 7, 7, 7, 7},
                {7, 10, 7, 10, 7, 10, 7}, {7, 7, 7, 7, 7, 7, 0},   {7, 10, 7, 10, 7, 0, 0},
                {7, 7, 7, 7, 0, 0, 0}};
  const Rows rect{{0, 0, 6, 9, 6, 0, 0}, {0, 8, 9, 8, 9, 8, 0}, {6, 9, 6, 9, 6, 9, 6}, {9, 8, 9, 8, 9, 8, 9},
                  {6, 9, 6, 9, 6, 9, 6}, {0, 8, 9, 8, 9, 8, 0}, {0, 0, 6, 9, 6, 0, 0}};
  const double de = matrix_diff(derive_mask(UniformGrid::equilateral(), WeightFunction::constant(), 1.6), eq, 1.0 / 70);
  const double dr = matrix_diff(derive_mask(UniformGrid::rectangular(), WeightFunction::constant(), 1.7), rect, 1.0 / 72);
  return {de <= 1e-12 && dr <= 1e-12, fmt("max diff equilateral %.3g rectangular %.3g", de, dr)};
}

Outcome ac2() {
  const auto& k = oracle::kEqHat;
  const double a = k[0], b = k[1], c = k[2], d = k[3], e = k[4], f = k[5];
  const Rows eq{{0, 0, 0, a, b, b, a}, {0, 0, b, c, d, c, b}, {0, b, d, e, e, d, b}, {a, c, e, f, e, c, a},
                {b, d, e, e, d, b, 0}, {b, c, d, c, b, 0, 0}, {a, b, b, a, 0, 0, 0}};
  const auto& q = oracle::kRectHat;
  const Rows rect{{0, 0, q[0], q[1], q[0], 0, 0},           {0, q[2], q[3], q[4], q[3], q[2], 0},
                  {q[0], q[3], q[5], q[6], q[5], q[3], q[0]}, {q[1], q[4], q[6], q[7], q[6], q[4], q[1]},
                  {q[0], q[3], q[5], q[6], q[5], q[3], q[0]}, {0, q[2], q[3], q[4], q[3], q[2], 0},
                  {0, 0, q[0], q[1], q[0], 0, 0}};
  const auto me = derive_mask(UniformGrid::equilateral(), WeightFunction::hat(), 1.6);
  const auto mr = derive_mask(UniformGrid::rectangular(), WeightFunction::hat(), 1.7);
  double lo = 1.0;
  for (const auto* m : {&me, &mr})
    for (const auto& [key, v] : m->entries()) lo = std::min(lo, v);
  const double de = matrix_diff(me, eq, 1.0), dr = matrix_diff(mr, rect, 1.0);
  return {de <= 1e-12 && dr <= 1e-12 && lo > 0.0,
          fmt("max diff equilateral %.3g rectangular %.3g, min coefficient %.4g", de, dr, lo)};
}

Outcome ac3() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_int_distribution<int> count(5, 60);
  const WeightFunction ws[] = {WeightFunction::constant(), WeightFunction::hat(), WeightFunction::gaussian()};
  double worst = 0.0;
  for (int m = 0; m < 100; ++m) {
    const auto tri = random_delaunay_mesh(static_cast<std::size_t>(count(rng)), rng());
    const LinearPolynomial p{u(rng), u(rng), u(rng)};
    worst = std::max(worst, check_reproduction(tri, ws[m % 3], default_base_L(tri), p));
  }
  return {worst <= 1e-10, fmt("100 meshes, max error %.3g", worst)};
}

Outcome ac4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const WeightFunction ws[] = {WeightFunction::constant(), WeightFunction::hat(), WeightFunction::gaussian()};
  double sum_err = 0.0, rel = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 3 + static_cast<std::size_t>(t % 10);
    const double L = 0.2 + 3.0 * std::abs(u(rng));
    const Point2 c{20.0 * u(rng), 20.0 * u(rng)};
    std::vector<Point2> pts;
    while (pts.size() < n) {
      const Point2 q{u(rng), u(rng)};
      if (norm(q) < 0.98) pts.push_back(c + L * q);
    }
    const auto ball = compute_coefficients(make_ball(pts, c, L, ws[t % 3]));
    std::vector<Point2> pos;
    for (auto i : ball.members) pos.push_back(pts[i]);
    const auto ref = oracle::wls_coefficients(pos, ball.weights, c);
    double s = 0.0, scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += ball.coefficients[i];
      scale = std::max(scale, std::abs(ref[i]));
      diff = std::max(diff, std::abs(ball.coefficients[i] - ref[i]));
    }
    sum_err = std::max(sum_err, std::abs(s - 1.0));
    rel = std::max(rel, diff / scale);
  }
  return {sum_err <= 1e-12 && rel <= 1e-9, fmt("1000 stencils, max |sum-1| %.3g, max rel diff %.3g", sum_err, rel)};
}

Outcome ac5() {
  const auto b = compute_coefficients(make_ball(oracle::kNegativeMembers, {0, 0}, 4.5, WeightFunction::constant()));
  const double lo = *std::min_element(b.coefficients.begin(), b.coefficients.end());
  double diff = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) diff = std::max(diff, std::abs(b.coefficients[i] - oracle::kNegativeAlpha[i]));
  return {lo < 0.0 && diff <= 1e-12, fmt("min coefficient %.6f (exact -2/97), max diff %.3g", lo, diff)};
}

Outcome ac6() {
  const auto tri = lattice_patch(UniformGrid::equilateral(), 6);
  const std::vector<double> h{0.4, 0.2, 0.1};
  RateOptions opts;
  opts.anchor = {0.8, 0.4};
  const auto r = estimate_approximation_order([](Point2 p) { return std::sin(p.x) * std::cos(p.y); }, tri, h, 3,
                                              WeightFunction::constant(), 1.6, opts);
  return {r.slope_valid && r.slope >= 1.8 && r.slope <= 2.2,
          fmt("errors %.3g %.3g %.3g, slope %.4f", r.errors[0], r.errors[1], r.errors[2], r.slope)};
}

Outcome ac7() {
  DataLevel lattice{lattice_patch(UniformGrid::equilateral(), 5), {}, 0, 1.6};
  lattice.values.assign(lattice.tri.vertex_count(), 0.0);
  const Point2 mid{0.0, 0.0};
  const double th = theta(lattice, WeightFunction::constant(), [&](Point2 p) { return norm(p - mid) < 2.0; });
  const auto one = noise_variance_trial(lattice.tri, WeightFunction::constant(), 1.6, 1.0, 1000, 71);
  NoiseOptions deep;
  deep.levels = 5;
  const auto five = noise_variance_trial(lattice_patch(UniformGrid::equilateral(), 4), WeightFunction::constant(), 1.6,
                                         1.0, 1000, 72, deep);
  const auto& l1 = one.levels[0];
  const auto& l5 = five.levels.back();
  const bool pass = std::abs(th - 1.0 / 7.0) <= 1e-15 && l1.max_ratio <= 1.0 / 7.0 + 3 * l1.standard_error &&
                    l5.level == 5 && l5.max_ratio <= 1.0 + 3 * l5.standard_error;
  return {pass, fmt("theta %.17g; level 1 max ratio %.4f (bound %.4f); level 5 max ratio %.4f (bound %.4f)", th,
                    l1.max_ratio, 1.0 / 7.0 + 3 * l1.standard_error, l5.max_ratio, 1.0 + 3 * l5.standard_error)};
}

Outcome ac8() {
  const std::vector<Method> methods{Method::subdivision};
  const std::vector<WeightFunction> weights{WeightFunction::hat()};
  const std::vector<double> Ls{1.0};
  int good = 0;
  double lo = 1e9, hi = 0.0, mean0 = 0.0;
  for (int s = 1; s <= 20; ++s) {
    ExperimentConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.iterations = 5;
    const auto d = diameter(experiment_mesh(cfg.seed));
    const auto t = run_experiment_6_2(cfg, methods, weights, Ls);
    const double e2 = t.rows.front().e2, e0 = t.initial().e2;
    lo = std::min(lo, e2);
    hi = std::max(hi, e2);
    mean0 += e0 / 20;
    if (d >= 0.78 && d <= 0.84 && e2 >= 0.05 && e2 <= 0.15 && e2 < e0) ++good;
  }
  return {good >= 19, fmt("%d/20 seeds in band, E2 range [%.4f, %.4f], mean initial E2 %.4f", good, lo, hi, mean0)};
}

Outcome ac9() {
  const auto sphere = icosphere(3);
  int good = 0;
  double before = 0.0, after = 0.0;
  for (int s = 1; s <= 20; ++s) {
    const auto noisy = radial_noise(sphere, 0.02, static_cast<std::uint64_t>(s));
    const auto out = surface_refine_step(noisy, WeightFunction::hat(), default_surface_L(noisy));
    const double b = radial_rms(noisy), a = radial_rms(out);
    before += b / 20;
    after += a / 20;
    if (a < b) ++good;
  }
  return {good >= 19, fmt("%d/20 seeds improved, mean RMS %.5f -> %.5f", good, before, after)};
}

Outcome ac10() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const WeightFunction ws[] = {WeightFunction::constant(), WeightFunction::hat(), WeightFunction::gaussian()};
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 3 + static_cast<std::size_t>(t % 10);
    const double L = 0.3 + 2.0 * std::abs(u(rng));
    const Point2 c{5.0 * u(rng), 5.0 * u(rng)};
    std::vector<Point2> pts;
    std::vector<double> z;
    while (pts.size() < n) {
      const Point2 q{u(rng), u(rng)};
      if (norm(q) < 0.98) {
        pts.push_back(c + L * q);
        z.push_back(5.0 * u(rng));
      }
    }
    const auto& w = ws[t % 3];
    const double rule = apply_rule(compute_coefficients(make_ball(pts, c, L, w)), z);
    const double mls = mls1_eval(ScatteredData(pts, z), w, L, c);
    worst = std::max(worst, std::abs(rule - mls) / std::max(1.0, std::abs(rule)));
  }
  return {worst <= 1e-9, fmt("500 cases, max difference %.3g", worst)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
    double budget_s;
  };
  const Criterion criteria[] = {
      {"AC1 mask equality", ac1, 1},          {"AC2 hat closed forms", ac2, 1},
      {"AC3 linear reproduction", ac3, 10},   {"AC4 partition of unity + oracle", ac4, 10},
      {"AC5 negative coefficients", ac5, 1},  {"AC6 approximation order", ac6, 30},
      {"AC7 denoising", ac7, 60},             {"AC8 noisy experiment", ac8, 300},
      {"AC9 surface denoising", ac9, 120},    {"AC10 MLS cross-check", ac10, 10},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %s: %s [%.2f s of %.0f s budget%s]\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), s,
                c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
