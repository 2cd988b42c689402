#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "wlssub/analysis.hpp"
#include "wlssub/baselines.hpp"
#include "wlssub/experiment.hpp"
#include "wlssub/fixtures.hpp"
#include "wlssub/geom3d.hpp"
#include "wlssub/uniform_masks.hpp"
#include "wlssub/wls.hpp"

namespace wlssub::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  nlohmann::json details = nlohmann::json::object();
};

struct Options {
  bool quick = false;
  std::uint64_t seed = 20240601;
};

namespace detail {

inline double max_mask_difference(const Mask& a, const Mask& b) {
  const int r = std::max(a.half_extent(), b.half_extent());
  const auto ma = a.matrix(r), mb = b.matrix(r);
  double d = 0.0;
  for (std::size_t i = 0; i < ma.size(); ++i)
    for (std::size_t j = 0; j < ma[i].size(); ++j) d = std::max(d, std::abs(ma[i][j] - mb[i][j]));
  return d;
}

/// Weighted degree-1 least squares solved densely in absolute coordinates.
inline std::vector<double> dense_coefficients(const StencilBall& ball) {
  const auto n = static_cast<Eigen::Index>(ball.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = ball.positions[i].x;
    a(i, 2) = ball.positions[i].y;
    w(i) = ball.weights[i];
  }
  const Eigen::Matrix3d normal = a.transpose() * w.asDiagonal() * a;
  const Eigen::Vector3d e(1.0, ball.center.x, ball.center.y);
  const Eigen::Vector3d y = normal.fullPivLu().solve(e);
  const Eigen::VectorXd alpha = w.asDiagonal() * (a * y);
  return {alpha.data(), alpha.data() + n};
}

template <class Fn>
CheckResult timed(std::string name, Fn&& fn) {
  CheckResult r;
  r.name = std::move(name);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fn(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.details["exception"] = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace detail

inline CheckResult check_published_masks() {
  return detail::timed("published_masks", [](CheckResult& r) {
    const double eq = detail::max_mask_difference(
        derive_mask(UniformGrid::equilateral(), WeightFunction::constant(), 1.6),
        published_mask(UniformGrid::Kind::equilateral, WeightFunction::Kind::constant));
    const double rect = detail::max_mask_difference(
        derive_mask(UniformGrid::rectangular(), WeightFunction::constant(), 1.7),
        published_mask(UniformGrid::Kind::rectangular, WeightFunction::Kind::constant));
    r.details = {{"equilateral_max_diff", eq}, {"rectangular_max_diff", rect}};
    r.passed = eq <= 1e-12 && rect <= 1e-12;
  });
}

inline CheckResult check_hat_closed_forms() {
  return detail::timed("hat_closed_forms", [](CheckResult& r) {
    const auto eq = derive_mask(UniformGrid::equilateral(), WeightFunction::hat(), 1.6);
    const auto rect = derive_mask(UniformGrid::rectangular(), WeightFunction::hat(), 1.7);
    const double deq = detail::max_mask_difference(
        eq, published_mask(UniformGrid::Kind::equilateral, WeightFunction::Kind::hat, 1.6));
    const double drect = detail::max_mask_difference(
        rect, published_mask(UniformGrid::Kind::rectangular, WeightFunction::Kind::hat, 1.7));
    double min_coeff = 1.0;
    for (const auto* m : {&eq, &rect})
      for (const auto& [k, a] : m->entries()) min_coeff = std::min(min_coeff, a);
    r.details = {{"equilateral_max_diff", deq}, {"rectangular_max_diff", drect}, {"min_coefficient", min_coeff}};
    r.passed = deq <= 1e-12 && drect <= 1e-12 && min_coeff > 0.0;
  });
}

inline CheckResult check_linear_reproduction(const Options& o) {
  return detail::timed("linear_reproduction", [&](CheckResult& r) {
    const int meshes = o.quick ? 10 : 100;
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<int> npts(6, 40);
    const WeightFunction ws[] = {WeightFunction::constant(), WeightFunction::hat(), WeightFunction::gaussian()};
    double worst = 0.0;
    for (int m = 0; m < meshes; ++m) {
      const auto tri = random_delaunay_mesh(static_cast<std::size_t>(npts(rng)), rng());
      const LinearPolynomial p{u(rng), u(rng), u(rng)};
      const double L = default_base_L(tri) * (1.0 + 0.5 * std::abs(u(rng)) / 5.0);
      worst = std::max(worst, check_reproduction(tri, ws[m % 3], L, p));
    }
    r.details = {{"meshes", meshes}, {"max_error", worst}};
    r.passed = worst <= 1e-10;
  });
}

inline CheckResult check_partition_of_unity(const Options& o) {
  return detail::timed("partition_of_unity", [&](CheckResult& r) {
    const int stencils = o.quick ? 100 : 1000;
    std::mt19937_64 rng(o.seed + 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const WeightFunction ws[] = {WeightFunction::constant(), WeightFunction::hat(), WeightFunction::gaussian()};
    double sum_err = 0.0, rel_err = 0.0;
    for (int t = 0; t < stencils; ++t) {
      const std::size_t n = 3 + static_cast<std::size_t>(t % 10);
      const double L = 0.5 + 2.0 * std::abs(u(rng));
      const Point2 c{10.0 * u(rng), 10.0 * u(rng)};
      std::vector<Point2> pts;
      while (pts.size() < n) {
        const Point2 q{u(rng), u(rng)};
        if (norm(q) < 0.95) pts.push_back(c + L * q);
      }
      const auto ball = compute_coefficients(make_ball(pts, c, L, ws[t % 3]));
      const auto ref = detail::dense_coefficients(ball);
      double s = 0.0, scale = 0.0, diff = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        s += ball.coefficients[i];
        scale = std::max(scale, std::abs(ref[i]));
        diff = std::max(diff, std::abs(ball.coefficients[i] - ref[i]));
      }
      sum_err = std::max(sum_err, std::abs(s - 1.0));
      rel_err = std::max(rel_err, diff / scale);
    }
    r.details = {{"stencils", stencils}, {"max_sum_error", sum_err}, {"max_relative_difference", rel_err}};
    r.passed = sum_err <= 1e-12 && rel_err <= 1e-9;
  });
}

inline CheckResult check_negative_coefficients() {
  return detail::timed("negative_coefficients", [](CheckResult& r) {
    const std::vector<Point2> pts{{-4, 1}, {-3, 1}, {-2, 1}, {-1, 1}, {4, 1}, {3, -1}};
    const auto ball = compute_coefficients(make_ball(pts, {0, 0}, 4.5, WeightFunction::constant()));
    const double lo = *std::min_element(ball.coefficients.begin(), ball.coefficients.end());
    r.details = {{"coefficients", ball.coefficients}, {"min_coefficient", lo}};
    r.passed = lo < 0.0;
  });
}

inline CheckResult check_approximation_order(const Options& o) {
  return detail::timed("approximation_order", [&](CheckResult& r) {
    const auto tri = lattice_patch(UniformGrid::equilateral(), 6);
    const std::vector<double> h{0.4, 0.2, 0.1};
    RateOptions opts;
    opts.anchor = {0.8, 0.4};
    const auto rep = estimate_approximation_order([](Point2 p) { return std::sin(p.x) * std::cos(p.y); }, tri, h,
                                                  o.quick ? 2 : 3, WeightFunction::constant(), 1.6, opts);
    r.details = {{"scales", rep.scales}, {"errors", rep.errors}, {"slope", rep.slope}};
    r.passed = rep.slope_valid && rep.slope >= 1.8 && rep.slope <= 2.2;
  });
}

inline CheckResult check_denoising(const Options& o) {
  return detail::timed("denoising", [&](CheckResult& r) {
    const auto mask = derive_mask(UniformGrid::equilateral(), WeightFunction::constant(), 1.6);
    const double th = theta(mask);
    const std::size_t trials = o.quick ? 200 : 1000;
    const auto lvl1 = noise_variance_trial(lattice_patch(UniformGrid::equilateral(), 5), WeightFunction::constant(),
                                           1.6, 1.0, trials, o.seed + 2);
    NoiseOptions deep;
    deep.levels = o.quick ? 2 : 5;
    const auto lvlk = noise_variance_trial(lattice_patch(UniformGrid::equilateral(), 4), WeightFunction::constant(),
                                           1.6, 1.0, trials, o.seed + 3, deep);
    const auto& last = lvlk.levels.back();
    r.details = {{"theta", th},
                 {"level1_max_ratio", lvl1.levels[0].max_ratio},
                 {"level1_standard_error", lvl1.levels[0].standard_error},
                 {"deep_level", last.level},
                 {"deep_max_ratio", last.max_ratio},
                 {"deep_standard_error", last.standard_error}};
    r.passed = std::abs(th - 1.0 / 7.0) <= 1e-15 && lvl1.theta_applicable && lvl1.within_bound() &&
               last.max_ratio <= 1.0 + 3.0 * last.standard_error;
  });
}

inline CheckResult check_experiment(const Options& o) {
  return detail::timed("noisy_experiment", [&](CheckResult& r) {
    const int seeds = o.quick ? 2 : 20;
    const std::vector<Method> methods{Method::subdivision};
    const std::vector<WeightFunction> weights{WeightFunction::hat()};
    const std::vector<double> Ls{1.0};
    int good = 0;
    nlohmann::json rows = nlohmann::json::array();
    for (int s = 0; s < seeds; ++s) {
      ExperimentConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(s + 1);
      cfg.iterations = 5;
      const auto table = run_experiment_6_2(cfg, methods, weights, Ls);
      const double e2 = table.rows.front().e2, e0 = table.initial().e2;
      if (e2 >= 0.05 && e2 <= 0.15 && e2 < e0) ++good;
      rows.push_back({{"seed", cfg.seed}, {"E2", e2}, {"initial_E2", e0}});
    }
    r.details = {{"seeds", seeds}, {"in_band", good}, {"runs", rows}};
    r.passed = good >= static_cast<int>(std::ceil(0.95 * seeds));
  });
}

inline CheckResult check_surface(const Options& o) {
  return detail::timed("surface_denoising", [&](CheckResult& r) {
    const int seeds = o.quick ? 3 : 20;
    const auto sphere = icosphere(3);
    int good = 0;
    double before_sum = 0.0, after_sum = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const auto noisy = radial_noise(sphere, 0.02, static_cast<std::uint64_t>(s + 1));
      const auto out = surface_refine_step(noisy, WeightFunction::hat(), default_surface_L(noisy));
      const double before = radial_rms(noisy), after = radial_rms(out);
      before_sum += before;
      after_sum += after;
      if (after < before) ++good;
    }
    r.details = {{"seeds", seeds},
                 {"improved", good},
                 {"mean_rms_before", before_sum / seeds},
                 {"mean_rms_after", after_sum / seeds}};
    r.passed = good >= static_cast<int>(std::ceil(0.95 * seeds));
  });
}

inline CheckResult check_mls_crosscheck(const Options& o) {
  return detail::timed("mls_crosscheck", [&](CheckResult& r) {
    const int cases = o.quick ? 100 : 500;
    std::mt19937_64 rng(o.seed + 4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const WeightFunction ws[] = {WeightFunction::constant(), WeightFunction::hat(), WeightFunction::gaussian()};
    double worst = 0.0;
    for (int t = 0; t < cases; ++t) {
      const std::size_t n = 3 + static_cast<std::size_t>(t % 10);
      const double L = 0.5 + std::abs(u(rng));
      const Point2 c{u(rng), u(rng)};
      std::vector<Point2> pts;
      std::vector<double> z;
      while (pts.size() < n) {
        const Point2 q{u(rng), u(rng)};
        if (norm(q) < 0.95) {
          pts.push_back(c + L * q);
          z.push_back(u(rng));
        }
      }
      const auto& w = ws[t % 3];
      const double rule = apply_rule(compute_coefficients(make_ball(pts, c, L, w)), z);
      const double mls = mls1_eval(ScatteredData(pts, z), w, L, c);
      worst = std::max(worst, std::abs(rule - mls) / std::max(1.0, std::abs(rule)));
    }
    r.details = {{"cases", cases}, {"max_difference", worst}};
    r.passed = worst <= 1e-9;
  });
}

/// Runs the whole battery in a fixed order.
inline std::vector<CheckResult> run_all(const Options& o = {}) {
  return {check_published_masks(),    check_hat_closed_forms(),   check_linear_reproduction(o),
          check_partition_of_unity(o), check_negative_coefficients(), check_approximation_order(o),
          check_denoising(o),         check_experiment(o),        check_surface(o),
          check_mls_crosscheck(o)};
}

inline nlohmann::json report(const std::vector<CheckResult>& results, const Options& o) {
  nlohmann::json checks = nlohmann::json::array();
  bool all = true;
  for (const auto& c : results) {
    all = all && c.passed;
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"seconds", c.seconds}, {"details", c.details}});
  }
  return {{"all_passed", all}, {"quick", o.quick}, {"seed", o.seed}, {"checks", std::move(checks)}};
}

}  // namespace wlssub::verify
