#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wlssub.hpp"

using namespace wlssub;

namespace {

// Exit codes by failure category.
constexpr int kExitFailedCheck = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitIo = 4;
constexpr int kExitNumerical = 5;
constexpr int kExitInternal = 70;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::io_error: return kExitIo;
    case ErrorCode::invalid_argument:
    case ErrorCode::invalid_mesh:
    case ErrorCode::parse_error:
    case ErrorCode::ambiguous_window:
    case ErrorCode::patch_too_small: return kExitInput;
    case ErrorCode::weight_domain:
    case ErrorCode::stencil_lacks_face:
    case ErrorCode::singular_system:
    case ErrorCode::empty_neighborhood:
    case ErrorCode::collinear_neighborhood:
    case ErrorCode::degenerate_neighborhood: return kExitNumerical;
  }
  return kExitInternal;
}

std::string sci(double v, int precision = 4) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, precision);
  return std::string(buf, r.ptr);
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fixed(double v, int precision) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, r.ptr);
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  for (auto tok : detail::split(s, ',')) {
    double v = 0.0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
      throw Error(ErrorCode::invalid_argument, std::string("bad number '") + std::string(tok) + "' in " + what);
    }
    out.push_back(v);
  }
  return out;
}

std::optional<double> parse_L(const std::string& s) {
  if (s.empty() || s == "auto") return std::nullopt;
  const auto v = parse_list(s, "--L");
  if (v.size() != 1) throw Error(ErrorCode::invalid_argument, "--L takes one number or 'auto'");
  return v[0];
}

Box2 parse_region(const std::string& s) {
  const auto v = parse_list(s, "--region");
  if (v.size() != 4 || !(v[0] < v[1]) || !(v[2] < v[3])) {
    throw Error(ErrorCode::invalid_argument, "--region must be xmin,xmax,ymin,ymax with min < max");
  }
  return {{v[0], v[2]}, {v[1], v[3]}};
}

UniformGrid parse_grid(const std::string& s) {
  if (s == "equilateral") return UniformGrid::equilateral();
  if (s == "rectangular") return UniformGrid::rectangular();
  throw Error(ErrorCode::invalid_argument, "unknown grid '" + s + "' (expected equilateral or rectangular)");
}

/// Writes to `path`, or to stdout when the path is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    std::ostringstream ss;
    ss.imbue(std::locale::classic());
    fn(ss);
    std::cout << ss.str();
    std::cout.flush();
    return;
  }
  auto out = detail::open_out(path);
  fn(out);
  detail::finish(out, path);
}

/// Best rational approximation with a small denominator, if it is exact to
/// round-off.
std::optional<std::pair<long long, long long>> as_rational(double v, long long max_den = 100000) {
  if (!std::isfinite(v)) return std::nullopt;
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = v;
  for (int it = 0; it < 40; ++it) {
    const double a = std::floor(x);
    if (std::abs(a) > 1e12) break;
    const auto ai = static_cast<long long>(a);
    const long long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    if (std::abs(static_cast<double>(p1) / static_cast<double>(q1) - v) <= 1e-13 * std::max(1.0, std::abs(v))) {
      return std::pair{p1, q1};
    }
    const double frac = x - a;
    if (frac == 0.0) break;
    x = 1.0 / frac;
  }
  return std::nullopt;
}

std::string rational_text(double v) {
  if (v == 0.0) return "0";
  if (const auto r = as_rational(v)) {
    return r->second == 1 ? std::to_string(r->first) : std::to_string(r->first) + "/" + std::to_string(r->second);
  }
  return format_double(v);
}

void print_matrix(std::ostream& out, const std::vector<std::vector<double>>& m, bool rational) {
  std::vector<std::vector<std::string>> cells;
  std::size_t width = 1;
  for (const auto& row : m) {
    auto& r = cells.emplace_back();
    for (double v : row) {
      r.push_back(v == 0.0 ? "." : rational ? rational_text(v) : fixed(v, 12));
      width = std::max(width, r.back().size());
    }
  }
  const std::size_t center = m.size() / 2;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = 0; j < cells[i].size(); ++j) {
      const bool c = i == center && j == center;
      std::string s = c ? "[" + cells[i][j] + "]" : " " + cells[i][j] + " ";
      out << std::string(width + 2 - s.size(), ' ') << s << (j + 1 < cells[i].size() ? " " : "\n");
    }
  }
}

// ---------------------------------------------------------------- refine

struct RefineArgs {
  std::string mesh = "experiment";
  std::string function = "sincos";
  std::string values;
  std::string weight = "hat";
  std::string L = "auto";
  int iterations = 5;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string output;
};

ExperimentConfig make_config(const RefineArgs& a) {
  ExperimentConfig cfg;
  cfg.mesh = a.mesh;
  cfg.function = a.function;
  if (!a.values.empty()) cfg.values = a.values;
  cfg.weight = WeightFunction::parse(a.weight);
  cfg.L = parse_L(a.L);
  cfg.iterations = a.iterations;
  cfg.noise_sd = a.noise;
  cfg.seed = a.seed;
  cfg.output_dir = a.output;
  return cfg;
}

void add_data_options(CLI::App* sub, RefineArgs& a) {
  sub->add_option("--mesh", a.mesh,
                  "OFF/OBJ file or generator: experiment[:seed], random:<n>[:seed], equilateral:<n>, rectangular:<n>")
      ->capture_default_str();
  sub->add_option("--function", a.function, "sampled function: sincos, linear, quadratic, constant, zero")
      ->capture_default_str();
  sub->add_option("--values", a.values, "vertex_index,value CSV used instead of --function");
  sub->add_option("--weight", a.weight, "constant, hat, gaussian or table:<path>")->capture_default_str();
  sub->add_option("--L", a.L, "ball radius at level 0, or 'auto' for 1.6 x diameter")->capture_default_str();
  sub->add_option("--noise", a.noise, "standard deviation of Gaussian noise added to the data")->capture_default_str();
  sub->add_option("--seed", a.seed, "seed for generated meshes and noise")->capture_default_str();
}

int run_refine_cmd(const RefineArgs& a) {
  const auto out = run_refine(make_config(a));
  std::cout << out.provenance.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------- mask

struct MaskArgs {
  std::string grid = "equilateral";
  std::string weight = "constant";
  double L = 1.6;
  std::string format = "decimal";
  bool compare = false;
  std::string output;
};

int run_mask_cmd(const MaskArgs& a) {
  const auto grid = parse_grid(a.grid);
  const auto w = WeightFunction::parse(a.weight);
  const auto mask = derive_mask(grid, w, a.L);
  const int r = mask.half_extent();
  const auto m = mask.matrix(r);

  std::optional<double> diff;
  if (a.compare) {
    const auto published = published_mask(grid.kind, w.kind(), a.L);
    const int rr = std::max(r, published.half_extent());
    const auto pm = published.matrix(rr), dm = mask.matrix(rr);
    double d = 0.0;
    for (std::size_t i = 0; i < pm.size(); ++i)
      for (std::size_t j = 0; j < pm.size(); ++j) d = std::max(d, std::abs(pm[i][j] - dm[i][j]));
    diff = d;
  }

  if (a.format == "json") {
    nlohmann::json rules = nlohmann::json::object();
    for (const auto& p : Mask::kClasses) {
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& t : mask.rule(p)) terms.push_back({{"source", t.source}, {"coefficient", t.coefficient}});
      rules[std::to_string(p[0]) + "," + std::to_string(p[1])] = {{"sum", mask.rule_sum(p)}, {"terms", terms}};
    }
    nlohmann::json j = {{"grid", a.grid},
                        {"weight", w.name()},
                        {"L", a.L},
                        {"half_extent", r},
                        {"orientation", "row r holds m2 = r - R, column c holds m1 = c - R"},
                        {"matrix", m},
                        {"rules", rules},
                        {"theta", theta(mask)},
                        {"rectangular_support", mask.support_is_rectangle()}};
    if (diff) {
      j["max_difference_to_published"] = *diff;
      j["matches_published"] = *diff <= 1e-12;
    }
    emit(a.output, [&](std::ostream& o) { o << j.dump(2) << "\n"; });
  } else if (a.format == "decimal" || a.format == "rational") {
    emit(a.output, [&](std::ostream& o) {
      o << a.grid << " grid, W = " << w.name() << ", L = " << shortest(a.L) << "\n";
      print_matrix(o, m, a.format == "rational");
      o << "theta = " << (a.format == "rational" ? rational_text(theta(mask)) : format_double(theta(mask))) << "\n";
      if (diff) o << "matches published: " << (*diff <= 1e-12 ? "yes" : "no") << " (max difference " << sci(*diff, 3) << ")\n";
    });
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown format '" + a.format + "' (expected decimal, rational, json)");
  }
  return diff && *diff > 1e-12 ? kExitFailedCheck : 0;
}

// ---------------------------------------------------------------- limitfn

struct LimitArgs {
  std::string grid = "equilateral";
  std::string weight = "constant";
  double L = 1.6;
  int iterations = 4;
  int half_width = 0;
  std::string output;
};

int run_limitfn_cmd(const LimitArgs& a) {
  const auto d = basic_limit_function(parse_grid(a.grid), WeightFunction::parse(a.weight), a.L, a.iterations,
                                      a.half_width);
  emit(a.output, [&](std::ostream& o) {
    o << "vertex_index,x,y,value\n";
    for (std::size_t i = 0; i < d.tri.vertex_count(); ++i) {
      const auto p = d.tri.vertices()[i];
      o << i << ',' << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(d.values[i]) << '\n';
    }
  });
  return 0;
}

// ---------------------------------------------------------------- verify

int run_verify_cmd(bool quick, std::uint64_t seed, const std::string& output) {
  const verify::Options o{quick, seed};
  const auto results = verify::run_all(o);
  const auto j = verify::report(results, o);
  emit(output, [&](std::ostream& s) { s << j.dump(2) << "\n"; });
  if (!output.empty() && output != "-") std::cout << j.dump(2) << "\n";
  return j["all_passed"].get<bool>() ? 0 : kExitFailedCheck;
}

// ---------------------------------------------------------------- baseline

struct BaselineArgs {
  RefineArgs data;
  std::string method = "mls";
  std::string grid = "-1,1,-1,1,21";
  std::string output;
};

int run_baseline_cmd(BaselineArgs a) {
  a.data.iterations = 0;
  auto cfg = make_config(a.data);
  cfg.output_dir.clear();
  const auto init = make_initial_data(cfg);
  const double L = init.data.base_L;

  const auto g = parse_list(a.grid, "--grid");
  if (g.size() != 5 || !(g[4] >= 1) || g[4] != std::floor(g[4])) {
    throw Error(ErrorCode::invalid_argument, "--grid must be xmin,xmax,ymin,ymax,n with integer n >= 1");
  }
  const auto n = static_cast<std::size_t>(g[4]);
  std::vector<Point2> targets;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double tx = n == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(n - 1);
      const double ty = n == 1 ? 0.5 : static_cast<double>(j) / static_cast<double>(n - 1);
      targets.push_back({g[0] + tx * (g[1] - g[0]), g[2] + ty * (g[3] - g[2])});
    }
  }
  BaselineMethod method;
  if (a.method == "shepard") {
    method = BaselineMethod::shepard;
  } else if (a.method == "mls") {
    method = BaselineMethod::mls;
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown method '" + a.method + "' (expected shepard or mls)");
  }
  std::size_t ill = 0;
  const auto values = evaluate_baseline(method, ScatteredData(init.data.tri.vertices(), init.data.values), cfg.weight,
                                        L, targets, &ill);
  emit(a.output, [&](std::ostream& o) {
    o << "x,y,value\n";
    for (std::size_t i = 0; i < targets.size(); ++i)
      o << format_double(targets[i].x) << ',' << format_double(targets[i].y) << ',' << format_double(values[i]) << '\n';
  });
  if (ill > 0) std::cerr << "warning: " << ill << " fits had condition number above " << sci(kMlsConditionWarning, 0) << "\n";
  return 0;
}

// ---------------------------------------------------------------- experiment62

struct ExperimentArgs {
  RefineArgs data;
  std::string methods = "subdivision,shepard,mls";
  std::string weights = "hat";
  std::string Ls = "1";
  std::string region = "-1,1,-1,1";
  std::string format = "table";
  std::string output;
};

int run_experiment_cmd(ExperimentArgs a) {
  auto cfg = make_config(a.data);
  cfg.output_dir.clear();
  cfg.region = parse_region(a.region);
  std::vector<Method> methods;
  for (auto s : detail::split(a.methods, ',')) methods.push_back(parse_method(s));
  std::vector<WeightFunction> weights;
  for (auto s : detail::split(a.weights, ',')) weights.push_back(WeightFunction::parse(s));
  const auto Ls = parse_list(a.Ls, "--L");
  const auto table = run_experiment_6_2(cfg, methods, weights, Ls);

  if (a.format == "json") {
    const nlohmann::json j = {{"mesh", cfg.mesh},
                              {"function", cfg.function},
                              {"noise_sd", cfg.noise_sd},
                              {"seed", cfg.seed},
                              {"iterations", cfg.iterations},
                              {"ill_conditioned_fits", table.ill_conditioned_fits},
                              {"rows", table.to_json()}};
    emit(a.output, [&](std::ostream& o) { o << j.dump(2) << "\n"; });
  } else if (a.format == "table") {
    emit(a.output, [&](std::ostream& o) {
      char line[160];
      std::snprintf(line, sizeof line, "%-12s %-10s %-8s %-11s %-11s %s\n", "method", "W", "L", "E2", "Einf", "count");
      o << line;
      for (const auto& r : table.rows) {
        const std::string L = r.method == "initial" ? "-" : shortest(r.L);
        std::snprintf(line, sizeof line, "%-12s %-10s %-8s %-11s %-11s %zu\n", r.method.c_str(),
                      r.weight.empty() ? "-" : r.weight.c_str(), L.c_str(), sci(r.e2).c_str(), sci(r.einf).c_str(),
                      r.count);
        o << line;
      }
    });
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown format '" + a.format + "' (expected table or json)");
  }
  return 0;
}

// ---------------------------------------------------------------- surface

struct SurfaceArgs {
  std::string mesh;
  int icosphere = -1;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string weight = "hat";
  std::string L = "auto";
  int iterations = 1;
  std::string output;
};

int run_surface_cmd(const SurfaceArgs& a) {
  if (a.mesh.empty() == (a.icosphere < 0)) {
    throw Error(ErrorCode::invalid_argument, "give exactly one of --mesh and --icosphere");
  }
  const bool sphere = a.icosphere >= 0;
  Triangulation3 mesh = sphere ? icosphere(a.icosphere) : load_triangulation3(a.mesh);
  if (a.noise > 0.0) mesh = sphere ? radial_noise(mesh, a.noise, a.seed) : isotropic_noise(mesh, a.noise, a.seed);
  if (!(a.noise >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise must be non-negative");
  const auto w = WeightFunction::parse(a.weight);
  const auto explicit_L = parse_L(a.L);
  const double L = explicit_L ? *explicit_L : default_surface_L(mesh);
  const auto out = surface_subdivide(mesh, w, L, a.iterations);
  if (!a.output.empty()) write_mesh(a.output, to_mesh_data(out));
  nlohmann::json j = {{"input_vertices", mesh.vertex_count()},
                      {"output_vertices", out.vertex_count()},
                      {"output_faces", out.face_count()},
                      {"weight", w.name()},
                      {"L", L},
                      {"L_auto", !explicit_L.has_value()},
                      {"iterations", a.iterations},
                      {"noise_sd", a.noise},
                      {"seed", a.seed}};
  if (sphere) {
    j["radial_rms_input"] = radial_rms(mesh);
    j["radial_rms_output"] = radial_rms(out);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::cout.imbue(std::locale::classic());
  CLI::App app{"Weighted least squares subdivision on triangulations"};
  app.require_subcommand(1);

  RefineArgs refine;
  auto* c_refine = app.add_subcommand("refine", "subdivide data on a planar triangulation");
  add_data_options(c_refine, refine);
  c_refine->add_option("--iterations", refine.iterations, "number of subdivision steps")->capture_default_str();
  c_refine->add_option("--output", refine.output, "directory for meshes, values and provenance.json");

  MaskArgs mask;
  auto* c_mask = app.add_subcommand("mask", "derive the mask of the scheme on a uniform grid");
  c_mask->add_option("--grid", mask.grid, "equilateral or rectangular")->capture_default_str();
  c_mask->add_option("--weight", mask.weight, "constant, hat, gaussian or table:<path>")->capture_default_str();
  c_mask->add_option("--L", mask.L, "ball radius")->capture_default_str();
  c_mask->add_option("--format", mask.format, "decimal, rational or json")->capture_default_str();
  c_mask->add_flag("--compare", mask.compare, "compare against the published mask");
  c_mask->add_option("--output", mask.output, "output file (default stdout)");

  LimitArgs limit;
  auto* c_limit = app.add_subcommand("limitfn", "refine delta data on a lattice patch");
  c_limit->add_option("--grid", limit.grid, "equilateral or rectangular")->capture_default_str();
  c_limit->add_option("--weight", limit.weight, "constant, hat, gaussian or table:<path>")->capture_default_str();
  c_limit->add_option("--L", limit.L, "ball radius")->capture_default_str();
  c_limit->add_option("--iterations", limit.iterations, "number of subdivision steps")->capture_default_str();
  c_limit->add_option("--half-width", limit.half_width, "lattice patch half-width (0 picks the smallest safe one)")
      ->capture_default_str();
  c_limit->add_option("--output", limit.output, "CSV output file (default stdout)");

  bool quick = false;
  std::uint64_t verify_seed = verify::Options{}.seed;
  std::string verify_output;
  auto* c_verify = app.add_subcommand("verify", "run the property battery and print a JSON report");
  c_verify->add_flag("--quick", quick, "smaller sample sizes");
  c_verify->add_option("--seed", verify_seed, "seed for the randomized checks")->capture_default_str();
  c_verify->add_option("--output", verify_output, "also write the report to this file");

  BaselineArgs baseline;
  auto* c_baseline = app.add_subcommand("baseline", "evaluate Shepard or MLS approximation on a target grid");
  add_data_options(c_baseline, baseline.data);
  c_baseline->add_option("--method", baseline.method, "shepard or mls")->capture_default_str();
  c_baseline->add_option("--grid", baseline.grid, "target grid xmin,xmax,ymin,ymax,n")->capture_default_str();
  c_baseline->add_option("--output", baseline.output, "CSV output file (default stdout)");

  ExperimentArgs experiment;
  experiment.data.noise = 0.2;
  auto* c_exp = app.add_subcommand("experiment62", "error table of subdivision against Shepard and MLS");
  c_exp->add_option("--mesh", experiment.data.mesh, "mesh file or generator spec")->capture_default_str();
  c_exp->add_option("--function", experiment.data.function, "reference function")->capture_default_str();
  c_exp->add_option("--noise", experiment.data.noise, "noise standard deviation")->capture_default_str();
  c_exp->add_option("--seed", experiment.data.seed, "seed for mesh and noise")->capture_default_str();
  c_exp->add_option("--iterations", experiment.data.iterations, "subdivision steps")->capture_default_str();
  c_exp->add_option("--methods", experiment.methods, "comma-separated subset of subdivision,shepard,mls")
      ->capture_default_str();
  c_exp->add_option("--weights", experiment.weights, "comma-separated weight functions")->capture_default_str();
  c_exp->add_option("--L", experiment.Ls, "comma-separated ball radii")->capture_default_str();
  c_exp->add_option("--region", experiment.region, "error region xmin,xmax,ymin,ymax")->capture_default_str();
  c_exp->add_option("--format", experiment.format, "table or json")->capture_default_str();
  c_exp->add_option("--output", experiment.output, "output file (default stdout)");

  SurfaceArgs surface;
  auto* c_surface = app.add_subcommand("surface", "subdivide a triangulated surface in 3D");
  c_surface->add_option("--mesh", surface.mesh, "OFF/OBJ surface mesh");
  c_surface->add_option("--icosphere", surface.icosphere, "use a unit icosphere with this many refinements");
  c_surface->add_option("--noise", surface.noise, "noise sd (radial on the icosphere, isotropic otherwise)")
      ->capture_default_str();
  c_surface->add_option("--seed", surface.seed, "noise seed")->capture_default_str();
  c_surface->add_option("--weight", surface.weight, "constant, hat, gaussian or table:<path>")->capture_default_str();
  c_surface->add_option("--L", surface.L, "ball radius, or 'auto' for 1.6 x longest edge")->capture_default_str();
  c_surface->add_option("--iterations", surface.iterations, "subdivision steps")->capture_default_str();
  c_surface->add_option("--output", surface.output, "OFF/OBJ output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*c_refine) return run_refine_cmd(refine);
    if (*c_mask) return run_mask_cmd(mask);
    if (*c_limit) return run_limitfn_cmd(limit);
    if (*c_verify) return run_verify_cmd(quick, verify_seed, verify_output);
    if (*c_baseline) return run_baseline_cmd(baseline);
    if (*c_exp) return run_experiment_cmd(experiment);
    if (*c_surface) return run_surface_cmd(surface);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.code()) << "]: " << e.message();
    if (e.vertex()) std::cerr << " (vertex " << *e.vertex() << ")";
    std::cerr << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
