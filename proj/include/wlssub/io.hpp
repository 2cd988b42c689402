#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "wlssub/error.hpp"
#include "wlssub/geom3d.hpp"
#include "wlssub/geometry.hpp"
#include "wlssub/mesh.hpp"

namespace wlssub {

// Number formatting. Everything goes through to_chars/from_chars, so output
// never depends on the global locale.

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  /// Next line with comments stripped and surrounding blanks removed; skips
  /// empty lines. Returns false at end of input.
  bool next(std::string_view& out) {
    while (std::getline(in_, buf_)) {
      ++line_;
      std::string_view s = buf_;
      if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
      s = trim(s);
      if (!s.empty()) {
        out = s;
        return true;
      }
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::parse_error, source_ + ":" + std::to_string(line_) + ": " + what);
  }

  double number(std::string_view tok) const {
    double v = 0.0;
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size() || !std::isfinite(v))
      fail("invalid number '" + std::string(tok) + "'");
    return v;
  }

  long long integer(std::string_view tok) const {
    long long v = 0;
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size()) fail("invalid integer '" + std::string(tok) + "'");
    return v;
  }

  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::string source_;
  std::string buf_;
  std::size_t line_ = 0;
};

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot open '" + path.string() + "' for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::io_error, "failed writing '" + path.string() + "'");
}

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

}  // namespace detail

/// Triangle mesh as stored in a file; 2D meshes use z = 0.
struct MeshData {
  std::vector<Point3> vertices;
  std::vector<Face> faces;
};

inline MeshData parse_off(std::istream& in, const std::string& source = "<off>") {
  detail::LineReader r(in, source);
  std::string_view line;
  if (!r.next(line)) r.fail("empty file");
  auto toks = detail::split_ws(line);
  // The counts may share the header line ("OFF 4 2 0").
  if (toks.empty() || toks[0] != "OFF") r.fail("expected 'OFF' header");
  toks.erase(toks.begin());
  if (toks.empty()) {
    if (!r.next(line)) r.fail("missing vertex/face counts");
    toks = detail::split_ws(line);
  }
  if (toks.size() < 2) r.fail("expected vertex and face counts");
  const long long nv = r.integer(toks[0]);
  const long long nf = r.integer(toks[1]);
  if (nv < 0 || nf < 0) r.fail("negative count");

  MeshData mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    if (!r.next(line)) r.fail("unexpected end of file: expected " + std::to_string(nv) + " vertices");
    const auto t = detail::split_ws(line);
    if (t.size() != 3) r.fail("vertex " + std::to_string(i) + " must have 3 coordinates");
    mesh.vertices.push_back({r.number(t[0]), r.number(t[1]), r.number(t[2])});
  }
  mesh.faces.reserve(static_cast<std::size_t>(nf));
  for (long long f = 0; f < nf; ++f) {
    if (!r.next(line)) r.fail("unexpected end of file: expected " + std::to_string(nf) + " faces");
    const auto t = detail::split_ws(line);
    if (t.empty()) r.fail("empty face");
    const long long k = r.integer(t[0]);
    if (k != 3) r.fail("face " + std::to_string(f) + " has " + std::to_string(k) + " vertices; only triangles are supported");
    if (t.size() < 4) r.fail("face " + std::to_string(f) + " lists fewer than 3 indices");
    Face face{};
    for (int c = 0; c < 3; ++c) {
      const long long v = r.integer(t[1 + c]);
      if (v < 0 || v >= nv) r.fail("face " + std::to_string(f) + " index " + std::to_string(v) + " out of range");
      face[c] = static_cast<Index>(v);
    }
    mesh.faces.push_back(face);
  }
  return mesh;
}

inline MeshData parse_obj(std::istream& in, const std::string& source = "<obj>") {
  detail::LineReader r(in, source);
  MeshData mesh;
  std::string_view line;
  std::size_t face_no = 0;
  while (r.next(line)) {
    const auto t = detail::split_ws(line);
    if (t[0] == "v") {
      if (t.size() < 3 || t.size() > 5) r.fail("vertex needs 2 or 3 coordinates");
      const double z = t.size() >= 4 ? r.number(t[3]) : 0.0;
      mesh.vertices.push_back({r.number(t[1]), r.number(t[2]), z});
    } else if (t[0] == "f") {
      const std::size_t k = t.size() - 1;
      if (k != 3) {
        r.fail("face " + std::to_string(face_no) + " has " + std::to_string(k) +
               " vertices; only triangles are supported");
      }
      Face face{};
      for (int c = 0; c < 3; ++c) {
        std::string_view tok = t[1 + c];
        tok = tok.substr(0, tok.find('/'));  // drop texture/normal references
        long long v = r.integer(tok);
        const auto n = static_cast<long long>(mesh.vertices.size());
        if (v < 0) v = n + v + 1;  // relative index
        if (v < 1 || v > n) r.fail("face " + std::to_string(face_no) + " references undefined vertex " + std::string(t[1 + c]));
        face[c] = static_cast<Index>(v - 1);
      }
      mesh.faces.push_back(face);
      ++face_no;
    }
    // Other records (vn, vt, g, o, s, usemtl, ...) carry nothing we use.
  }
  return mesh;
}

inline MeshData read_mesh(const std::filesystem::path& path) {
  const auto ext = detail::lower_extension(path);
  auto in = detail::open_in(path);
  if (ext == ".off") return parse_off(in, path.string());
  if (ext == ".obj") return parse_obj(in, path.string());
  throw Error(ErrorCode::io_error, "unsupported mesh format '" + ext + "' (use .off or .obj)");
}

inline void write_off(std::ostream& out, const MeshData& mesh) {
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
  for (const auto& v : mesh.vertices)
    out << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z) << '\n';
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

inline void write_obj(std::ostream& out, const MeshData& mesh) {
  for (const auto& v : mesh.vertices)
    out << "v " << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z) << '\n';
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

inline void write_mesh(const std::filesystem::path& path, const MeshData& mesh) {
  const auto ext = detail::lower_extension(path);
  auto out = detail::open_out(path);
  if (ext == ".off") {
    write_off(out, mesh);
  } else if (ext == ".obj") {
    write_obj(out, mesh);
  } else {
    throw Error(ErrorCode::io_error, "unsupported mesh format '" + ext + "' (use .off or .obj)");
  }
  detail::finish(out, path);
}

inline MeshData to_mesh_data(const Triangulation2& tri) {
  MeshData m;
  for (const auto& v : tri.vertices()) m.vertices.push_back({v.x, v.y, 0.0});
  m.faces = tri.faces();
  return m;
}

inline MeshData to_mesh_data(const Triangulation3& mesh) { return {mesh.vertices(), mesh.faces()}; }

/// Planar view of a mesh file; z must vanish everywhere.
inline Triangulation2 to_triangulation2(const MeshData& m) {
  std::vector<Point2> v;
  v.reserve(m.vertices.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    if (m.vertices[i].z != 0.0)
      throw Error(ErrorCode::invalid_mesh, "vertex " + std::to_string(i) + " has nonzero z; expected a planar mesh");
    v.push_back({m.vertices[i].x, m.vertices[i].y});
  }
  return Triangulation2(std::move(v), m.faces);
}

inline Triangulation3 to_triangulation3(const MeshData& m) { return Triangulation3(m.vertices, m.faces); }

inline Triangulation2 load_triangulation2(const std::filesystem::path& path) {
  return to_triangulation2(read_mesh(path));
}
inline Triangulation3 load_triangulation3(const std::filesystem::path& path) {
  return to_triangulation3(read_mesh(path));
}

// Values: CSV with header "vertex_index,value", one row per vertex.

inline void write_values(std::ostream& out, std::span<const double> values) {
  out << "vertex_index,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << format_double(values[i]) << '\n';
}

inline std::vector<double> parse_values(std::istream& in, const std::string& source = "<values>") {
  detail::LineReader r(in, source);
  std::string_view line;
  if (!r.next(line) || line != "vertex_index,value") r.fail("expected header 'vertex_index,value'");
  std::vector<double> values;
  std::vector<bool> seen;
  while (r.next(line)) {
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) r.fail("expected 'vertex_index,value'");
    const long long idx = r.integer(detail::trim(line.substr(0, comma)));
    const double v = r.number(detail::trim(line.substr(comma + 1)));
    if (idx < 0) r.fail("negative vertex index");
    const auto i = static_cast<std::size_t>(idx);
    if (i >= values.size()) {
      values.resize(i + 1, 0.0);
      seen.resize(i + 1, false);
    }
    if (seen[i]) r.fail("duplicate vertex index " + std::to_string(i));
    seen[i] = true;
    values[i] = v;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw Error(ErrorCode::parse_error, source + ": missing value for vertex " + std::to_string(i));
  return values;
}

inline void save_values(const std::filesystem::path& path, std::span<const double> values) {
  auto out = detail::open_out(path);
  write_values(out, values);
  detail::finish(out, path);
}

inline std::vector<double> load_values(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return parse_values(in, path.string());
}

/// Mesh + values; the value count must match the vertex count.
inline DataLevel load_data(const std::filesystem::path& mesh_path, const std::filesystem::path& values_path,
                           double base_L, int level = 0) {
  DataLevel d{load_triangulation2(mesh_path), load_values(values_path), level, base_L};
  require_valid(d);
  return d;
}

inline void save_data(const DataLevel& data, const std::filesystem::path& mesh_path,
                      const std::filesystem::path& values_path) {
  write_mesh(mesh_path, to_mesh_data(data.tri));
  save_values(values_path, data.values);
}

inline nlohmann::json to_json(const RefinementMap& map) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : map.parent_edge) edges.push_back({e.a, e.b});
  return {{"old_count", map.old_count}, {"parent_edge", std::move(edges)}};
}

inline RefinementMap refinement_map_from_json(const nlohmann::json& j) {
  try {
    RefinementMap map;
    map.old_count = j.at("old_count").get<std::size_t>();
    for (const auto& e : j.at("parent_edge")) map.parent_edge.push_back({e.at(0).get<Index>(), e.at(1).get<Index>()});
    return map;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("refinement map: ") + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
  detail::finish(out, path);
}

}  // namespace wlssub
