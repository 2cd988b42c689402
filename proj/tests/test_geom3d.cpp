#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wlssub/fixtures.hpp"
#include "wlssub/geom3d.hpp"

using namespace wlssub;

namespace {

void expect_orthonormal(const LocalFrame& f) {
  EXPECT_NEAR(norm(f.b1), 1.0, 1e-12);
  EXPECT_NEAR(norm(f.b2), 1.0, 1e-12);
  EXPECT_NEAR(norm(f.b3), 1.0, 1e-12);
  EXPECT_NEAR(dot(f.b1, f.b2), 0.0, 1e-12);
  EXPECT_NEAR(dot(f.b1, f.b3), 0.0, 1e-12);
  EXPECT_NEAR(dot(f.b2, f.b3), 0.0, 1e-12);
  const Point3 c = cross(f.b1, f.b2);
  EXPECT_NEAR(distance(c, f.b3), 0.0, 1e-15);
}

/// Rotation about the unit axis a by angle t, applied to p.
Point3 rotate(Point3 p, Point3 a, double t) {
  return std::cos(t) * p + std::sin(t) * cross(a, p) + (1 - std::cos(t)) * dot(a, p) * a;
}

Triangulation3 plane_mesh() {
  // Grid on the plane z = 0.3 x - 0.2 y + 1, jittered within the plane.
  std::vector<Point3> v;
  std::vector<Face> f;
  const int n = 8;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const double x = i * 0.25 + 0.05 * std::sin(3.0 * j + i), y = j * 0.25 + 0.05 * std::cos(2.0 * i - j);
      v.push_back({x, y, 0.3 * x - 0.2 * y + 1.0});
    }
  auto id = [&](int i, int j) { return static_cast<Index>(j * (n + 1) + i); };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      f.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
      f.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return Triangulation3(v, f);
}

}  // namespace

TEST(Triangulation3, Validate) {
  const Triangulation3 good({{0, 0, 0}, {1, 0, 0}, {0, 1, 1}}, {{0, 1, 2}});
  EXPECT_TRUE(validate(good).empty());
  const Triangulation3 flat({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}}, {{0, 1, 2}});
  EXPECT_EQ(validate(flat).size(), 1u);
  const Triangulation3 dup({{0, 0, 0}, {1, 0, 0}, {0, 1, 1}}, {{0, 0, 2}});
  EXPECT_EQ(validate(dup).at(0).kind, Violation::Kind::duplicate_index);
}

TEST(LocalFrame, PlanarPointsGiveVerticalNormal) {
  const std::vector<Point3> pts{{1, 0, 0}, {0, 2, 0}, {-1, 0.5, 0}, {0.3, -1, 0}};
  const auto f = local_frame(pts, {0, 0, 0});
  expect_orthonormal(f);
  EXPECT_NEAR(std::abs(f.b3.z), 1.0, 1e-12);
}

TEST(LocalFrame, TwoPointsAreDegenerate) {
  const std::vector<Point3> pts{{1, 0, 0}, {0, 1, 0}};
  try {
    local_frame(pts, {0, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_neighborhood);
  }
}

TEST(LocalFrame, ParallelVectorsAreDegenerate) {
  const std::vector<Point3> pts{{1, 1, 1}, {2, 2, 2}, {-1, -1, -1}, {0, 0, 0}};
  EXPECT_THROW(local_frame(pts, {0, 0, 0}), Error);
}

TEST(LocalFrame, ParaboloidNormalWithinFifteenDegrees) {
  const double a = 0.4;
  const Point3 o{0.3, 0.2, a * (0.09 + 0.04)};
  std::vector<Point3> pts;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j) {
      const double x = o.x + 0.1 * i, y = o.y + 0.1 * j;
      pts.push_back({x, y, a * (x * x + y * y)});
    }
  const auto f = local_frame(pts, o);
  expect_orthonormal(f);
  Point3 n{-2 * a * o.x, -2 * a * o.y, 1.0};
  n = n / norm(n);
  const double angle = std::acos(std::min(1.0, std::abs(dot(n, f.b3))));
  EXPECT_LT(angle, 15.0 * std::numbers::pi / 180.0);
}

TEST(LocalFrame, SignConventionIsFixed) {
  const std::vector<Point3> pts{{1, 0.1, 0}, {-2, 0.3, 0.1}, {0.2, 1.5, -0.1}, {0.1, -0.7, 0.05}};
  const auto f = local_frame(pts, {0, 0, 0});
  for (const Point3& b : {f.b1, f.b2}) {
    const double comps[3] = {b.x, b.y, b.z};
    int k = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(comps[i]) > std::abs(comps[k])) k = i;
    EXPECT_GT(comps[k], 0.0);
  }
}

TEST(SurfaceRefine, PlaneStaysPlanar) {
  const auto mesh = plane_mesh();
  const auto out = surface_refine_step(mesh, WeightFunction::hat(), 1.6 * max_edge_length(mesh));
  EXPECT_EQ(out.vertex_count(), mesh.vertex_count() + mesh.edges().size());
  for (const auto& p : out.vertices()) EXPECT_NEAR(p.z, 0.3 * p.x - 0.2 * p.y + 1.0, 1e-9);
}

TEST(SurfaceRefine, NoisySphereGetsCloserToTheSphere) {
  const auto base = icosphere(3);
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto noisy = radial_noise(base, 0.02, seed);
    const auto out = surface_refine_step(noisy, WeightFunction::hat(), 1.6 * max_edge_length(noisy));
    if (radial_rms(out) < radial_rms(noisy)) ++improved;
  }
  EXPECT_EQ(improved, 5);
}

TEST(SurfaceRefine, TinyRadiusFails) {
  const auto mesh = icosphere(1);
  try {
    surface_refine_step(mesh, WeightFunction::hat(), 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::stencil_lacks_face);
    EXPECT_TRUE(e.vertex().has_value());
  }
}

TEST(SurfaceRefine, RigidMotionEquivariance) {
  const auto mesh = radial_noise(icosphere(2), 0.02, 4);
  const double L = 1.6 * max_edge_length(mesh);
  const Point3 axis = Point3{1, 2, -0.5} / norm(Point3{1, 2, -0.5});
  const Point3 shift{3, -1, 0.5};
  std::vector<Point3> moved;
  for (const auto& p : mesh.vertices()) moved.push_back(rotate(p, axis, 0.7) + shift);
  const auto a = surface_refine_step(mesh, WeightFunction::hat(), L);
  const auto b = surface_refine_step(Triangulation3(moved, mesh.faces()), WeightFunction::hat(), L);
  for (std::size_t i = 0; i < a.vertex_count(); ++i) {
    EXPECT_NEAR(distance(rotate(a.vertices()[i], axis, 0.7) + shift, b.vertices()[i]), 0.0, 1e-9);
  }
}

TEST(SurfaceRefine, Deterministic) {
  const auto mesh = radial_noise(icosphere(2), 0.02, 9);
  const double L = 1.6 * max_edge_length(mesh);
  EXPECT_EQ(surface_refine_step(mesh, WeightFunction::gaussian(), L),
            surface_refine_step(mesh, WeightFunction::gaussian(), L));
}

TEST(SurfaceSubdivide, ZeroIterationsIsIdentity) {
  const auto mesh = icosphere(1);
  EXPECT_EQ(surface_subdivide(mesh, WeightFunction::hat(), 1.0, 0), mesh);
}

TEST(SurfaceSubdivide, VertexCountsFollowVPlusE) {
  auto mesh = radial_noise(icosphere(1), 0.01, 2);
  const auto out = surface_subdivide(mesh, WeightFunction::hat(), 1.6 * max_edge_length(mesh), 3);
  std::size_t v = mesh.vertex_count(), f = mesh.face_count();
  for (int k = 0; k < 3; ++k) {
    const std::size_t e = 3 * f / 2;  // closed surface
    v += e;
    f *= 4;
  }
  EXPECT_EQ(out.vertex_count(), v);
  EXPECT_EQ(out.face_count(), f);
}

TEST(SurfaceSubdivide, NoisyTorusStaysFinite) {
  const auto mesh = isotropic_noise(torus(2.0, 0.7, 24, 12), 0.01, 5);
  const auto out = surface_subdivide(mesh, WeightFunction::gaussian(), 1.6 * max_edge_length(mesh), 2);
  for (const auto& p : out.vertices()) {
    EXPECT_TRUE(std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z));
  }
  EXPECT_TRUE(validate(out).empty());
}
