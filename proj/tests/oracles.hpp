#pragma once

// Test-side reference implementations, written independently of the library
// formulas they check.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "wlssub/geometry.hpp"

namespace oracle {

/// Coefficients of the evaluation-at-center functional of the weighted
/// degree-1 least squares fit, from the normal equations in absolute
/// coordinates, solved with a full-pivoting LU in long double.
inline std::vector<double> wls_coefficients(const std::vector<wlssub::Point2>& pts, const std::vector<double>& w,
                                            wlssub::Point2 center) {
  using Mat = Eigen::Matrix<long double, 3, 3>;
  using Vec = Eigen::Matrix<long double, 3, 1>;
  Mat m = Mat::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec b(1.0L, pts[i].x, pts[i].y);
    m += static_cast<long double>(w[i]) * b * b.transpose();
  }
  const Vec c(1.0L, center.x, center.y);
  const Vec y = m.fullPivLu().solve(c);  // M symmetric: alpha_i = w_i b_i^T M^{-1} c
  std::vector<double> alpha(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec b(1.0L, pts[i].x, pts[i].y);
    alpha[i] = static_cast<double>(static_cast<long double>(w[i]) * b.dot(y));
  }
  return alpha;
}

/// det |1 1 1; a b c| written out as a 3x3 determinant.
inline long double det3(wlssub::Point2 a, wlssub::Point2 b, wlssub::Point2 c) {
  Eigen::Matrix<long double, 3, 3> m;
  m << 1, 1, 1, a.x, b.x, c.x, a.y, b.y, c.y;
  return m.determinant();
}

/// mu_i by the literal triple loop over pairs j1 < j2.
inline std::vector<double> mu_bruteforce(const std::vector<wlssub::Point2>& pts, const std::vector<double>& w,
                                         wlssub::Point2 center) {
  std::vector<double> mu(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    long double s = 0.0L;
    for (std::size_t j1 = 0; j1 < pts.size(); ++j1)
      for (std::size_t j2 = j1 + 1; j2 < pts.size(); ++j2)
        s += static_cast<long double>(w[j1]) * w[j2] * det3(center, pts[j1], pts[j2]) * det3(pts[i], pts[j1], pts[j2]);
    mu[i] = static_cast<double>(s);
  }
  return mu;
}

// Frozen reference values, computed once with exact rational arithmetic or
// from the published closed forms, and not recomputed by the library.

/// Negative-coefficient configuration: members and exact coefficients
/// (unit weights, center at the origin).
inline const std::vector<wlssub::Point2> kNegativeMembers{{-4, 1}, {-3, 1}, {-2, 1}, {-1, 1}, {4, 1}, {3, -1}};
inline const std::vector<double> kNegativeAlpha{16.0 / 97, 55.0 / 388, 23.0 / 194, 37.0 / 388, -2.0 / 97, 1.0 / 2};

/// exp(-(2.5 * 0.4)^2 / 2).
inline constexpr double kGaussianAt04 = 0.6065306597126334;

/// Equilateral hat mask at L = 1.6 (a..f coefficients, g the denominator).
inline constexpr double kEqHat[7] = {0.020094659630583087, 0.055687193774269825, 0.11538461538461538,
                                     0.14748969688446353,  0.22104125593641377,  0.30769230769230765,
                                     9.952893140603884};

/// Rectangular hat mask at L = 1.7, as coefficients (published values / 72).
inline constexpr double kRectHat[8] = {0.024146690061085826, 0.03900259411030925, 0.05064310763215667,
                                       0.1134909206139176,   0.12404428858443589, 0.20170661987782845,
                                       0.23401556466185555,  0.30125041513363};

}  // namespace oracle
