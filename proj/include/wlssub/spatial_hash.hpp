#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "wlssub/geometry.hpp"

namespace wlssub {

namespace detail {
inline std::array<double, 2> coords(Point2 p) { return {p.x, p.y}; }
inline std::array<double, 3> coords(Point3 p) { return {p.x, p.y, p.z}; }
}  // namespace detail

/// Uniform bucket grid over a fixed point set, answering "all points closer
/// than r to q" queries. Results come back sorted by index.
template <class Point>
class SpatialHash {
  static constexpr std::size_t kDim = decltype(detail::coords(Point{}))().size();

 public:
  SpatialHash(std::span<const Point> points, double cell_size)
      : points_(points.begin(), points.end()), cell_(cell_size) {
    if (!(cell_ > 0.0) || !std::isfinite(cell_)) cell_ = 1.0;
    lo_.fill(0.0);
    dims_.fill(1);
    if (points_.empty()) {
      offsets_.assign(2, 0);
      return;
    }
    std::array<double, kDim> hi;
    lo_ = detail::coords(points_[0]);
    hi = lo_;
    for (const auto& p : points_) {
      const auto c = detail::coords(p);
      for (std::size_t d = 0; d < kDim; ++d) {
        lo_[d] = std::min(lo_[d], c[d]);
        hi[d] = std::max(hi[d], c[d]);
      }
    }
    // Cap the number of cells so a tiny cell size cannot blow up memory.
    const double cap = 8.0 * static_cast<double>(points_.size()) + 64.0;
    for (;;) {
      double total = 1.0;
      for (std::size_t d = 0; d < kDim; ++d) {
        dims_[d] = static_cast<std::int64_t>(std::floor((hi[d] - lo_[d]) / cell_)) + 1;
        total *= static_cast<double>(dims_[d]);
      }
      if (total <= cap) break;
      cell_ *= 2.0;
    }
    std::size_t cells = 1;
    for (auto d : dims_) cells *= static_cast<std::size_t>(d);
    std::vector<std::size_t> cell_of(points_.size());
    offsets_.assign(cells + 1, 0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      cell_of[i] = linear(cell_coords(detail::coords(points_[i])));
      ++offsets_[cell_of[i] + 1];
    }
    for (std::size_t c = 0; c < cells; ++c) offsets_[c + 1] += offsets_[c];
    entries_.resize(points_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      entries_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
    }
  }

  /// Indices j with |points[j] - q| < radius, ascending.
  std::vector<std::uint32_t> within(const Point& q, double radius) const {
    std::vector<std::uint32_t> out;
    if (points_.empty()) return out;
    const auto c = detail::coords(q);
    std::array<std::int64_t, kDim> from{};
    std::array<std::int64_t, kDim> to{};
    for (std::size_t d = 0; d < kDim; ++d) {
      from[d] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((c[d] - radius - lo_[d]) / cell_)));
      to[d] = std::min<std::int64_t>(dims_[d] - 1, static_cast<std::int64_t>(std::floor((c[d] + radius - lo_[d]) / cell_)));
      if (from[d] > to[d]) return out;
    }
    std::array<std::int64_t, kDim> idx = from;
    for (;;) {
      const std::size_t cell = linear(idx);
      for (std::size_t k = offsets_[cell]; k < offsets_[cell + 1]; ++k) {
        const auto j = entries_[k];
        if (distance(points_[j], q) < radius) out.push_back(j);
      }
      std::size_t d = 0;
      for (; d < kDim; ++d) {
        if (++idx[d] <= to[d]) break;
        idx[d] = from[d];
      }
      if (d == kDim) break;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::array<std::int64_t, kDim> cell_coords(const std::array<double, kDim>& c) const {
    std::array<std::int64_t, kDim> out{};
    for (std::size_t d = 0; d < kDim; ++d) {
      out[d] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((c[d] - lo_[d]) / cell_)), 0, dims_[d] - 1);
    }
    return out;
  }

  std::size_t linear(const std::array<std::int64_t, kDim>& idx) const {
    std::size_t out = 0;
    for (std::size_t d = kDim; d-- > 0;) out = out * static_cast<std::size_t>(dims_[d]) + static_cast<std::size_t>(idx[d]);
    return out;
  }

  std::vector<Point> points_;
  double cell_;
  std::array<double, kDim> lo_;
  std::array<std::int64_t, kDim> dims_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> entries_;
};

}  // namespace wlssub
