#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "wlssub/error.hpp"
#include "wlssub/geometry.hpp"
#include "wlssub/parallel.hpp"
#include "wlssub/spatial_hash.hpp"
#include "wlssub/weights.hpp"

namespace wlssub {

/// Sites with one value each; sites must be pairwise distinct.
class ScatteredData {
 public:
  ScatteredData(std::vector<Point2> sites, std::vector<double> values)
      : sites_(std::move(sites)), values_(std::move(values)) {
    if (sites_.size() != values_.size())
      throw Error(ErrorCode::invalid_argument, "scattered data: " + std::to_string(sites_.size()) + " sites but " +
                                                   std::to_string(values_.size()) + " values");
    std::vector<std::size_t> order(sites_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto key = [&](std::size_t i) { return std::pair{sites_[i].x, sites_[i].y}; };
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return key(a) < key(b); });
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (key(order[i]) == key(order[i - 1]))
        throw Error(ErrorCode::invalid_argument, "scattered data: sites " + std::to_string(order[i - 1]) + " and " +
                                                     std::to_string(order[i]) + " coincide");
    }
  }

  const std::vector<Point2>& sites() const noexcept { return sites_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return sites_.size(); }

 private:
  std::vector<Point2> sites_;
  std::vector<double> values_;
};

/// Generalized Shepard: sum z_i W(|t - v_i| / L) / sum W(...), W zero past 1.
inline double shepard_eval(const ScatteredData& data, const WeightFunction& w, double L, Point2 target) {
  if (!(L > 0.0)) throw Error(ErrorCode::invalid_argument, "L must be positive");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double wi = w.zero_extended(distance(target, data.sites()[i]) / L);
    num += wi * data.values()[i];
    den += wi;
  }
  if (den <= 0.0) throw Error(ErrorCode::empty_neighborhood, "no site has positive weight at the target");
  return num / den;
}

struct Mls1Fit {
  double value = 0.0;
  Point2 gradient{};
  double condition = 0.0;  // 1-norm condition of the scaled normal matrix
  bool ill_conditioned = false;
};

inline constexpr double kMlsConditionWarning = 1e12;

namespace detail {

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Gaussian elimination with partial pivoting; returns false if a pivot vanishes.
inline bool solve3(Mat3 a, std::array<double, 3>& b) {
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) <= 1e-14 * scale) return false;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < 3; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (int c = 2; c >= 0; --c) {
    for (int k = c + 1; k < 3; ++k) b[c] -= a[c][k] * b[k];
    b[c] /= a[c][c];
  }
  return true;
}

inline double norm1(const Mat3& a) {
  double out = 0.0;
  for (int c = 0; c < 3; ++c) out = std::max(out, std::abs(a[0][c]) + std::abs(a[1][c]) + std::abs(a[2][c]));
  return out;
}

}  // namespace detail

/// Degree-1 weighted least squares fit centred at the target. Coordinates are
/// taken relative to the target and divided by L, so the conditioning does not
/// depend on where or at what scale the data lives.
inline Mls1Fit mls1_fit(const ScatteredData& data, const WeightFunction& w, double L, Point2 target) {
  if (!(L > 0.0)) throw Error(ErrorCode::invalid_argument, "L must be positive");
  detail::Mat3 m{};
  std::array<double, 3> rhs{};
  std::size_t used = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Point2 d = (data.sites()[i] - target) / L;
    const double wi = w.zero_extended(norm(d));
    if (wi <= 0.0) continue;
    ++used;
    const std::array<double, 3> b{1.0, d.x, d.y};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += wi * b[r] * b[c];
      rhs[r] += wi * b[r] * data.values()[i];
    }
  }
  if (used == 0) throw Error(ErrorCode::empty_neighborhood, "no site has positive weight at the target");

  detail::Mat3 inv{};
  for (int c = 0; c < 3; ++c) {
    std::array<double, 3> e{};
    e[c] = 1.0;
    if (!detail::solve3(m, e))
      throw Error(ErrorCode::collinear_neighborhood, "weighted sites are collinear; degree-1 fit undetermined");
    for (int r = 0; r < 3; ++r) inv[r][c] = e[r];
  }
  if (!detail::solve3(m, rhs))
    throw Error(ErrorCode::collinear_neighborhood, "weighted sites are collinear; degree-1 fit undetermined");

  Mls1Fit fit;
  fit.value = rhs[0];
  fit.gradient = Point2{rhs[1] / L, rhs[2] / L};
  fit.condition = detail::norm1(m) * detail::norm1(inv);
  fit.ill_conditioned = fit.condition > kMlsConditionWarning;
  return fit;
}

inline double mls1_eval(const ScatteredData& data, const WeightFunction& w, double L, Point2 target) {
  return mls1_fit(data, w, L, target).value;
}

enum class BaselineMethod { shepard, mls };

/// Evaluates a baseline at many targets. `ill_conditioned`, when given,
/// receives the number of MLS fits above the condition warning threshold.
inline std::vector<double> evaluate_baseline(BaselineMethod method, const ScatteredData& data,
                                             const WeightFunction& w, double L, std::span<const Point2> targets,
                                             std::size_t* ill_conditioned = nullptr) {
  std::vector<double> out(targets.size());
  std::vector<unsigned char> flagged(targets.size(), 0);
  parallel_for(targets.size(), [&](std::size_t i) {
    try {
      if (method == BaselineMethod::shepard) {
        out[i] = shepard_eval(data, w, L, targets[i]);
      } else {
        const auto fit = mls1_fit(data, w, L, targets[i]);
        out[i] = fit.value;
        flagged[i] = fit.ill_conditioned ? 1 : 0;
      }
    } catch (const Error& e) {
      throw e.at_vertex(i);
    }
  });
  if (ill_conditioned) *ill_conditioned = static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), 1));
  return out;
}

}  // namespace wlssub
