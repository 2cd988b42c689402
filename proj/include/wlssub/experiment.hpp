#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wlssub/analysis.hpp"
#include "wlssub/baselines.hpp"
#include "wlssub/error.hpp"
#include "wlssub/fixtures.hpp"
#include "wlssub/io.hpp"
#include "wlssub/mesh.hpp"
#include "wlssub/uniform_masks.hpp"
#include "wlssub/weights.hpp"
#include "wlssub/wls.hpp"

namespace wlssub {

/// Named smooth test functions.
inline ScalarField test_function(std::string_view name) {
  if (name == "sincos") return [](Point2 p) { return std::sin(p.x) * std::cos(p.y); };
  if (name == "linear") return [](Point2 p) { return 2.0 + 3.0 * p.x - 5.0 * p.y; };
  if (name == "quadratic") return [](Point2 p) { return p.x * p.x + p.y * p.y; };
  if (name == "constant") return [](Point2) { return 1.0; };
  if (name == "zero") return [](Point2) { return 0.0; };
  throw Error(ErrorCode::invalid_argument,
              "unknown function '" + std::string(name) + "' (expected sincos, linear, quadratic, constant, zero)");
}

/// values + iid N(0, sd^2), drawn from a generator seeded by `seed`.
inline std::vector<double> add_gaussian_noise(std::span<const double> values, double sd, std::uint64_t seed) {
  if (!(sd >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise sd must be non-negative");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6e6f6973u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> out(values.begin(), values.end());
  for (auto& v : out) v += sd * noise(rng);
  return out;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto p = s.find(sep);
    out.push_back(s.substr(0, p));
    if (p == std::string_view::npos) return out;
    s.remove_prefix(p + 1);
  }
}

inline std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw Error(ErrorCode::invalid_argument, "invalid " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

}  // namespace detail

/// Mesh from a file path or a generator spec:
///   experiment[:seed]         227-vertex irregular mesh on [-3.2, 3.2]^2
///   random:<n>[:seed]         Delaunay mesh of n random points in [0, 1]^2
///   equilateral:<n>           lattice patch with |l1|, |l2| <= n, unit spacing
///   rectangular:<n>
/// A generator without an explicit seed uses `default_seed`.
inline Triangulation2 make_mesh(std::string_view spec, std::uint64_t default_seed) {
  const auto parts = detail::split(spec, ':');
  const auto seed_at = [&](std::size_t i) {
    return parts.size() > i ? detail::parse_u64(parts[i], "seed") : default_seed;
  };
  if (parts[0] == "experiment" && parts.size() <= 2) return experiment_mesh(seed_at(1));
  if (parts[0] == "random" && (parts.size() == 2 || parts.size() == 3)) {
    return random_delaunay_mesh(detail::parse_u64(parts[1], "point count"), seed_at(2));
  }
  if ((parts[0] == "equilateral" || parts[0] == "rectangular") && parts.size() == 2) {
    const auto n = static_cast<int>(detail::parse_u64(parts[1], "patch size"));
    return lattice_patch(parts[0] == "equilateral" ? UniformGrid::equilateral() : UniformGrid::rectangular(), n);
  }
  return load_triangulation2(std::filesystem::path(std::string(spec)));
}

struct ExperimentConfig {
  std::string mesh = "experiment";  // path or generator spec, see make_mesh
  std::string function = "sincos";
  std::optional<std::filesystem::path> values;  // read data instead of sampling `function`
  WeightFunction weight = WeightFunction::hat();
  std::optional<double> L;  // empty: 1.6 x diameter
  int iterations = 5;
  double noise_sd = 0.2;
  std::uint64_t seed = 1;
  Box2 region{{-1.0, -1.0}, {1.0, 1.0}};
  std::filesystem::path output_dir;  // empty: nothing written

  void check() const {
    if (iterations < 0) throw Error(ErrorCode::invalid_argument, "iterations must be non-negative");
    if (!(noise_sd >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise sd must be non-negative");
    if (L && (!(*L > 0.0) || !std::isfinite(*L))) throw Error(ErrorCode::invalid_argument, "L must be positive");
  }

  /// Ball radius for `tri`; an explicit L must exceed the mesh diameter.
  double resolve_L(const Triangulation2& tri) const {
    if (!L) return default_base_L(tri);
    const double d = diameter(tri);
    if (!(*L > d)) {
      throw Error(ErrorCode::invalid_argument,
                  "L = " + format_double(*L) + " must exceed the mesh diameter " + format_double(d));
    }
    return *L;
  }
};

/// Initial data of a config: mesh, clean samples of the function and the
/// noisy values actually refined.
struct InitialData {
  DataLevel data;
  std::vector<double> clean;
};

inline InitialData make_initial_data(const ExperimentConfig& cfg) {
  cfg.check();
  Triangulation2 tri = make_mesh(cfg.mesh, cfg.seed);
  require_valid(tri);
  InitialData out;
  out.clean = cfg.values ? load_values(*cfg.values) : sample(test_function(cfg.function), tri.vertices());
  if (out.clean.size() != tri.vertex_count()) {
    throw Error(ErrorCode::invalid_argument, "value count " + std::to_string(out.clean.size()) +
                                                 " does not match vertex count " + std::to_string(tri.vertex_count()));
  }
  const double L = cfg.resolve_L(tri);
  auto noisy = cfg.noise_sd > 0.0 ? add_gaussian_noise(out.clean, cfg.noise_sd, cfg.seed) : out.clean;
  out.data = DataLevel{std::move(tri), std::move(noisy), 0, L};
  return out;
}

inline nlohmann::json to_json(const LevelStats& s) {
  return {{"level", s.level},
          {"vertices", s.vertices},
          {"faces", s.faces},
          {"radius", s.radius},
          {"min_members", s.min_members},
          {"max_members", s.max_members},
          {"fragile_members", s.fragile_members},
          {"centroid_rules", s.centroid_rules},
          {"min_coefficient", s.min_coefficient},
          {"theta", s.theta}};
}

struct RefineArtifacts {
  DataLevel initial;
  DataLevel result;
  std::vector<LevelStats> levels;
  nlohmann::json provenance;
};

/// Refines the configured data and, if an output directory is set, writes
/// initial.off, initial_values.csv, refined.off, refined_values.csv and
/// provenance.json there.
inline RefineArtifacts run_refine(const ExperimentConfig& cfg) {
  auto init = make_initial_data(cfg);
  RefineArtifacts out;
  out.initial = init.data;
  out.result = subdivide(init.data, cfg.weight, cfg.iterations, {}, &out.levels);

  nlohmann::json levels = nlohmann::json::array();
  levels.push_back({{"level", 0}, {"vertices", out.initial.tri.vertex_count()}, {"faces", out.initial.tri.face_count()}});
  std::size_t fragile = 0;
  for (const auto& s : out.levels) {
    levels.push_back(to_json(s));
    fragile += s.fragile_members;
  }
  out.provenance = {{"mesh", cfg.mesh},
                    {"data", cfg.values ? nlohmann::json(cfg.values->string()) : nlohmann::json(cfg.function)},
                    {"weight", cfg.weight.name()},
                    {"L", out.initial.base_L},
                    {"L_auto", !cfg.L.has_value()},
                    {"diameter", diameter(out.initial.tri)},
                    {"iterations", cfg.iterations},
                    {"noise_sd", cfg.noise_sd},
                    {"seed", cfg.seed},
                    {"fragile_members", fragile},
                    {"levels", std::move(levels)}};

  if (!cfg.output_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw Error(ErrorCode::io_error, "cannot create '" + cfg.output_dir.string() + "': " + ec.message());
    save_data(out.initial, cfg.output_dir / "initial.off", cfg.output_dir / "initial_values.csv");
    save_data(out.result, cfg.output_dir / "refined.off", cfg.output_dir / "refined_values.csv");
    write_json(cfg.output_dir / "provenance.json", out.provenance);
  }
  return out;
}

enum class Method { subdivision, shepard, mls };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::subdivision: return "subdivision";
    case Method::shepard: return "shepard";
    case Method::mls: return "mls";
  }
  return "unknown";
}

inline Method parse_method(std::string_view s) {
  if (s == "subdivision") return Method::subdivision;
  if (s == "shepard") return Method::shepard;
  if (s == "mls") return Method::mls;
  throw Error(ErrorCode::invalid_argument, "unknown method '" + std::string(s) + "' (expected subdivision, shepard, mls)");
}

struct ErrorRow {
  std::string method;  // "initial" for the noisy input itself
  std::string weight;
  double L = 0.0;
  double e2 = 0.0;
  double einf = 0.0;
  std::size_t count = 0;
};

struct ExperimentTable {
  std::vector<ErrorRow> rows;
  std::size_t ill_conditioned_fits = 0;

  const ErrorRow& initial() const { return rows.back(); }

  nlohmann::json to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
      out.push_back({{"method", r.method}, {"W", r.weight}, {"L", r.L}, {"E2", r.e2}, {"Einf", r.einf},
                     {"count", r.count}});
    }
    return out;
  }
};

/// Error table of the comparison experiment: every method x weight x L
/// combination is evaluated at the finest subdivision vertices inside the
/// region, followed by an "initial" row for the noisy input at the initial
/// vertices inside the region. cfg.weight and cfg.L are ignored in favour
/// of `weights` and `Ls`.
inline ExperimentTable run_experiment_6_2(const ExperimentConfig& cfg, std::span<const Method> methods,
                                          std::span<const WeightFunction> weights, std::span<const double> Ls) {
  if (methods.empty()) throw Error(ErrorCode::invalid_argument, "no methods requested");
  if (weights.empty() || Ls.empty()) throw Error(ErrorCode::invalid_argument, "need at least one weight and one L");
  ExperimentConfig base = cfg;
  base.L.reset();
  const auto init = make_initial_data(base);
  const auto f = cfg.values ? ScalarField{} : test_function(cfg.function);
  if (!f) throw Error(ErrorCode::invalid_argument, "the experiment needs a reference function, not a values file");
  for (double L : Ls) {
    ExperimentConfig c = cfg;
    c.L = L;
    (void)c.resolve_L(init.data.tri);
  }

  // Evaluation points: the finest vertices inside the region.
  Triangulation2 fine = init.data.tri;
  for (int k = 0; k < cfg.iterations; ++k) fine = midpoint_refine(fine).first;
  std::vector<Point2> targets;
  for (const auto& v : fine.vertices())
    if (cfg.region.contains(v)) targets.push_back(v);
  if (targets.empty()) throw Error(ErrorCode::invalid_argument, "error region selects no vertices");
  const ScatteredData scattered(init.data.tri.vertices(), init.data.values);

  ExperimentTable table;
  for (const auto method : methods) {
    for (const auto& w : weights) {
      for (const double L : Ls) {
        ErrorMetrics m;
        if (method == Method::subdivision) {
          DataLevel d = init.data;
          d.base_L = L;
          const auto out = subdivide(d, w, cfg.iterations);
          m = error_metrics(out.values, f, out.tri.vertices(), cfg.region);
        } else {
          std::size_t ill = 0;
          const auto values = evaluate_baseline(method == Method::shepard ? BaselineMethod::shepard : BaselineMethod::mls,
                                                scattered, w, L, targets, &ill);
          table.ill_conditioned_fits += ill;
          m = error_metrics(values, f, targets, cfg.region);
        }
        table.rows.push_back({std::string(to_string(method)), w.name(), L, m.e2, m.einf, m.count});
      }
    }
  }
  const auto m0 = error_metrics(init.data.values, f, init.data.tri.vertices(), cfg.region);
  table.rows.push_back({"initial", "", 0.0, m0.e2, m0.einf, m0.count});
  return table;
}

}  // namespace wlssub
