#pragma once

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wlssub/error.hpp"

namespace wlssub {

/// Radial weight profile W : [0, 1) -> (0, 1]. Immutable once built.
class WeightFunction {
 public:
  enum class Kind { constant, hat, gaussian, tabulated };

  static WeightFunction constant() { return WeightFunction(Kind::constant); }
  static WeightFunction hat() { return WeightFunction(Kind::hat); }
  static WeightFunction gaussian() { return WeightFunction(Kind::gaussian); }

  /// Samples at t_i = i / (n - 1) on [0, 1], linearly interpolated. Every
  /// sample used inside [0, 1) must lie in (0, 1]; the sample at t = 1 may be 0.
  static WeightFunction tabulated(std::vector<double> samples) {
    if (samples.size() < 2) throw Error(ErrorCode::invalid_argument, "weight table needs at least 2 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double s = samples[i];
      const bool last = i + 1 == samples.size();
      if (!(s <= 1.0) || (last ? !(s >= 0.0) : !(s > 0.0))) {
        throw Error(ErrorCode::invalid_argument,
                    "weight table sample " + std::to_string(i) + " outside (0, 1]");
      }
    }
    WeightFunction w(Kind::tabulated);
    w.table_ = std::make_shared<const std::vector<double>>(std::move(samples));
    return w;
  }

  /// Parses "constant", "hat", "gaussian" or "table:<path>". A table file
  /// holds the samples separated by whitespace or commas.
  static WeightFunction parse(std::string_view spec) {
    if (spec == "constant" || spec == "1") return constant();
    if (spec == "hat") return hat();
    if (spec == "gaussian") return gaussian();
    if (spec.starts_with("table:")) {
      const std::string path(spec.substr(6));
      std::ifstream in(path);
      if (!in) throw Error(ErrorCode::io_error, "cannot open weight table " + path);
      std::stringstream buf;
      buf << in.rdbuf();
      std::string text = buf.str();
      for (char& c : text)
        if (c == ',') c = ' ';
      std::istringstream tokens(text);
      tokens.imbue(std::locale::classic());
      std::vector<double> samples;
      double v;
      while (tokens >> v) samples.push_back(v);
      if (!tokens.eof()) throw Error(ErrorCode::parse_error, "bad number in weight table " + path);
      return tabulated(std::move(samples));
    }
    throw Error(ErrorCode::invalid_argument, "unknown weight function '" + std::string(spec) + "'");
  }

  Kind kind() const noexcept { return kind_; }

  std::string name() const {
    switch (kind_) {
      case Kind::constant: return "constant";
      case Kind::hat: return "hat";
      case Kind::gaussian: return "gaussian";
      case Kind::tabulated: return "tabulated";
    }
    return "unknown";
  }

  /// W(t) for t in [0, 1). Anything else is a stencil/weight mismatch.
  double operator()(double t) const {
    if (!(t >= 0.0 && t < 1.0)) {
      throw Error(ErrorCode::weight_domain, "weight argument " + std::to_string(t) + " outside [0, 1)");
    }
    return raw(t);
  }

  /// W extended by zero on [1, inf), as scattered-data methods use it.
  double zero_extended(double t) const {
    if (!(t >= 0.0)) throw Error(ErrorCode::weight_domain, "negative weight argument");
    return t < 1.0 ? raw(t) : 0.0;
  }

  const std::vector<double>* table() const noexcept { return table_.get(); }

 private:
  explicit WeightFunction(Kind kind) : kind_(kind) {}

  double raw(double t) const {
    switch (kind_) {
      case Kind::constant: return 1.0;
      case Kind::hat: return 1.0 - t;
      case Kind::gaussian: {
        const double s = 2.5 * t;
        return std::exp(-s * s / 2.0);
      }
      case Kind::tabulated: {
        const auto& s = *table_;
        const double pos = t * static_cast<double>(s.size() - 1);
        const auto i = static_cast<std::size_t>(pos);
        if (i + 1 >= s.size()) return s.back();
        const double frac = pos - static_cast<double>(i);
        return s[i] + frac * (s[i + 1] - s[i]);
      }
    }
    return 0.0;
  }

  Kind kind_;
  std::shared_ptr<const std::vector<double>> table_;
};

/// Weight of a parent vertex at `distance` from a level-(k+1) vertex:
/// W(distance / (2^{-k} base_L)).
inline double evaluate_weight(const WeightFunction& w, double distance, int level, double base_L) {
  const double radius = std::ldexp(base_L, -level);
  if (!(distance >= 0.0 && distance < radius)) {
    throw Error(ErrorCode::weight_domain, "distance " + std::to_string(distance) +
                                              " outside the ball of radius " + std::to_string(radius));
  }
  return w(distance / radius);
}

}  // namespace wlssub
