#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "generators.hpp"
#include "iris3d/delaunay.hpp"
#include "iris3d/error.hpp"
#include "iris3d/phantom.hpp"
#include "iris3d/pipeline.hpp"
#include "iris3d/reconstruct.hpp"
#include "oracles.hpp"

using namespace iris3d;
using iris3d::testing::Gen;

namespace {

recon::ScanGeometry geometry(std::size_t slices) {
  recon::ScanGeometry g;
  g.slices = slices;
  return g;
}

TriMesh flat_square(double side) {
  TriMesh m;
  m.vertices.points = {Vec3(0, 0, 0), Vec3(side, 0, 0), Vec3(side, side, 0), Vec3(0, side, 0)};
  m.vertices.compute_polar();
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

}  // namespace

TEST_CASE("slice geometry places boundary points on meridians") {
  const auto g = geometry(128);
  SliceBoundarySet set;
  set.slices.push_back({0, {{g.center_column() - 100, 40}}, {{g.center_column() + 100, 40}}});
  const auto cloud = recon::slices_to_cloud(set, g);
  REQUIRE(cloud.size() == 2);
  CHECK(cloud.points[0].x() == doctest::Approx(-100));
  CHECK(std::abs(cloud.points[0].y()) < 1e-12);
  CHECK(cloud.azimuth[0] == doctest::Approx(std::numbers::pi));
  CHECK(cloud.points[1].x() == 100.0);
  CHECK(cloud.points[1].y() == 0.0);
  CHECK(cloud.points[1].z() == 40.0);
  CHECK(g.slice_angle(32) == doctest::Approx(std::numbers::pi / 4));
}

TEST_CASE("128 slices give 256 meridians 1.40625 degrees apart") {
  const auto g = geometry(128);
  SliceBoundarySet set;
  for (std::size_t i = 0; i < 128; ++i)
    set.slices.push_back({i, {{g.center_column() - 50, 10}}, {{g.center_column() + 50, 10}}});
  auto cloud = recon::slices_to_cloud(set, g);
  std::vector<double> az = cloud.azimuth;
  std::sort(az.begin(), az.end());
  REQUIRE(az.size() == 256);
  for (std::size_t i = 1; i < az.size(); ++i) CHECK((az[i] - az[i - 1]) * 180 / std::numbers::pi == doctest::Approx(1.40625));
}

TEST_CASE("out-of-range slices and points are rejected") {
  const auto g = geometry(8);
  SliceBoundarySet set;
  set.slices.push_back({8, {}, {{300, 10}}});
  CHECK_THROWS_AS(recon::slices_to_cloud(set, g), InvariantError);
  set.slices[0] = {0, {}, {{static_cast<double>(g.width), 10}}};
  CHECK_THROWS_AS(recon::slices_to_cloud(set, g), InvariantError);
}

TEST_CASE("four meridians with two samples make a closed band") {
  PointCloud3D cloud;
  for (int m = 0; m < 4; ++m) {
    const double phi = m * std::numbers::pi / 2;
    for (double r : {1.0, 2.0}) cloud.points.emplace_back(r * std::cos(phi), r * std::sin(phi), 0.0);
  }
  const auto cm = recon::coarse_mesh(cloud, 2);
  CHECK(cm.mesh.vertices.size() == 8);
  CHECK(cm.mesh.faces.size() == 8);  // 4 meridians x (M-1) quads x 2
  CHECK(edges_manifold(cm.mesh));
  CHECK_NOTHROW(cm.mesh.validate());
}

TEST_CASE("coarse mesh rejects too few meridians and skips short ones") {
  PointCloud3D two;
  for (double phi : {0.0, 1.0})
    for (double r : {1.0, 2.0}) two.points.emplace_back(r * std::cos(phi), r * std::sin(phi), 0.0);
  CHECK_THROWS_AS(recon::coarse_mesh(two, 4), InvariantError);
  PointCloud3D cloud = two;
  cloud.points.emplace_back(std::cos(2.0), std::sin(2.0), 0.0);
  cloud.points.emplace_back(std::cos(3.0), std::sin(3.0), 0.0);
  cloud.points.emplace_back(2 * std::cos(3.0), 2 * std::sin(3.0), 0.0);
  const auto cm = recon::coarse_mesh(cloud, 4);
  CHECK(cm.meridians == 3);
  CHECK(cm.warnings.size() == 1);
}

TEST_CASE("flat phantom gives a planar coarse mesh") {
  phantom::PhantomParams p;
  const auto g = geometry(32);
  const auto vol = phantom::phantom_slices(p, g);
  const auto cm = recon::coarse_mesh(recon::slices_to_cloud(vol.boundaries, g), 16);
  for (const auto& v : cm.mesh.vertices.points) CHECK(std::abs(v.z() - p.base_depth) < 1e-9);
  CHECK(edges_manifold(cm.mesh));
  CHECK_NOTHROW(cm.mesh.validate());
}

TEST_CASE("Poisson samples on a flat square respect r2 and the packing band") {
  const TriMesh sq = flat_square(100);
  const std::vector<double> curv(4, 0.5);
  recon::SamplingParams sp;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    sp.seed = seed;
    const auto s = recon::poisson_disk_resample(sq, curv, sp);
    CHECK(iris3d::testing::min_pairwise_distance(s.cloud.points) >= 10.0);
    const double area = 100.0 * 100.0, n = static_cast<double>(s.cloud.size());
    CHECK(n >= area / (std::numbers::pi * 100.0) * 0.5);
    CHECK(n <= area / (100.0 / 2.0));
  }
}

TEST_CASE("a triangle smaller than r2 holds exactly one sample") {
  TriMesh t;
  t.vertices.points = {Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(0, 3, 1)};
  t.faces = {{0, 1, 2}};
  const auto s = recon::poisson_disk_resample(t, std::vector<double>{0.0, 0.0, 0.0}, recon::SamplingParams{});
  CHECK(s.cloud.size() == 1);
}

TEST_CASE("adaptive radii follow the curvature mean") {
  recon::SamplingParams sp;
  CHECK(recon::adaptive_radius(2.0, 1.0, sp) == sp.r1);
  CHECK(recon::adaptive_radius(1.0, 1.0, sp) == sp.r2);
  TriMesh sq = flat_square(120);
  const std::vector<double> curv{5.0, 0.0, 0.0, 0.0};
  const auto s = recon::poisson_disk_resample(sq, curv, sp);
  CHECK(iris3d::testing::min_disk_ratio(s.cloud.points, s.radius) >= 1.0);
  CHECK(std::count(s.radius.begin(), s.radius.end(), sp.r1) > 0);
}

TEST_CASE("sampling rejects bad inputs and is deterministic") {
  const TriMesh sq = flat_square(50);
  CHECK_THROWS_AS(recon::poisson_disk_resample(sq, std::vector<double>(3, 0.0), {}), InvariantError);
  TriMesh flat = sq;
  for (auto& v : flat.vertices.points) v.y() = 0.0;
  CHECK_THROWS_AS(recon::poisson_disk_resample(flat, std::vector<double>(4, 0.0), {}), InvariantError);
  recon::SamplingParams bad;
  bad.r1 = 12;
  CHECK_THROWS_AS(recon::poisson_disk_resample(sq, std::vector<double>(4, 0.0), bad), InvariantError);
  const auto a = recon::poisson_disk_resample(sq, std::vector<double>(4, 0.0), {});
  const auto b = recon::poisson_disk_resample(sq, std::vector<double>(4, 0.0), {});
  CHECK(a.cloud.points == b.cloud.points);
}

TEST_CASE("Delaunay small cases") {
  PointCloud3D tri;
  tri.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  CHECK(retriangulate(tri).faces.size() == 1);

  PointCloud3D sq;
  sq.points = {Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(2, 2, 0), Vec3(0, 2, 0), Vec3(1, 1, 1)};
  const auto m = retriangulate(sq);
  CHECK(m.faces.size() == 4);
  CHECK(iris3d::testing::worst_circumcircle_violation(m.vertices.points, m.faces) <= 1e-9);

  PointCloud3D line;
  line.points = {Vec3(0, 0, 0), Vec3(1, 1, 0), Vec3(2, 2, 0), Vec3(3, 3, 0)};
  CHECK_THROWS_AS(retriangulate(line), InvariantError);
}

TEST_CASE("cocircular grid still passes the empty-circumcircle test") {
  PointCloud3D grid;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) grid.points.emplace_back(i, j, 0.1 * i);
  const auto m = retriangulate(grid);
  CHECK(m.faces.size() == 2 * 11 * 11);
  CHECK(iris3d::testing::worst_circumcircle_violation(m.vertices.points, m.faces) <= 1e-9);
  CHECK(edges_manifold(m));
}

TEST_CASE("random point sets triangulate to Delaunay meshes") {
  Gen g(40);
  for (int trial = 0; trial < 10; ++trial) {
    PointCloud3D c;
    const std::size_t n = static_cast<std::size_t>(g.integer(3, 300));
    for (std::size_t i = 0; i < n; ++i) c.points.emplace_back(g.uniform(-50, 50), g.uniform(-50, 50), g.uniform(0, 1));
    const auto m = retriangulate(c);
    CHECK(iris3d::testing::worst_circumcircle_violation(m.vertices.points, m.faces) <= 1e-9);
    CHECK(edges_manifold(m));
    // Euler: a triangulated convex hull with h hull vertices has 2n - 2 - h faces.
    CHECK(m.faces.size() <= 2 * n - 5);
  }
}

TEST_CASE("exact predicates on near-degenerate input") {
  const Vec2 a(0.5, 0.5), b(12.0, 12.0), c(24.0, 24.0);
  CHECK(orient2d(a, b, c) == 0);
  const Vec2 d(0.5 + 1e-15, 0.5);
  CHECK(orient2d(d, b, c) != 0);
  CHECK(incircle(Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)) == 0);
  CHECK(incircle(Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0.5, 0.5)) == 1);
}

TEST_CASE("phantom reconstruction stays on the analytic surface") {
  phantom::PhantomParams p;
  p.bow = 20;
  p.frill_amplitude = 3;
  pipeline::PipelineConfig cfg;
  cfg.geometry.slices = 64;
  const auto vol = phantom::phantom_slices(p, cfg.geometry);
  const auto s = pipeline::reconstruct_surface(vol.boundaries, cfg, 3);
  double se = 0.0;
  for (const auto& v : s.refined.vertices.points) {
    const double rho = std::hypot(v.x(), v.y());
    se += std::pow(v.z() - (p.base_depth - phantom::profile(p, rho).f), 2);
  }
  CHECK(std::sqrt(se / static_cast<double>(s.refined.vertices.size())) < 2.0 * cfg.geometry.s_z);
  CHECK(iris3d::testing::min_disk_ratio(s.samples.cloud.points, s.samples.radius) >= 1.0);
  CHECK(edges_manifold(s.refined));
  const auto again = pipeline::reconstruct_surface(vol.boundaries, cfg, 3);
  CHECK(again.samples.cloud.points == s.samples.cloud.points);
}
