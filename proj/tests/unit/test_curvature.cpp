#include <doctest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "iris3d/curvature.hpp"
#include "iris3d/error.hpp"
#include "iris3d/phantom.hpp"
#include "iris3d/pipeline.hpp"
#include "iris3d/reconstruct.hpp"

using namespace iris3d;
using iris3d::testing::Gen;

TEST_CASE("sphere of radius 10") {
  const TriMesh cap = iris3d::testing::sphere_cap(10.0, std::numbers::pi / 2.5, 25.0);
  const auto field = curv::curvature_field(cap);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < cap.vertices.size(); ++i) {
    if (cap.vertices.points[i].z() < 10.0 * std::cos(std::numbers::pi / 4)) continue;
    // Outward normal points along +z, the sphere bends away from it.
    CHECK(field.k1[i] == doctest::Approx(-0.1).epsilon(0.05));
    CHECK(field.k2[i] == doctest::Approx(-0.1).epsilon(0.05));
    CHECK(field.gaussian[i] == doctest::Approx(0.01).epsilon(0.10));
    CHECK(field.mean[i] == doctest::Approx(-0.1).epsilon(0.05));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("plane: curvature below the noise floor and planar flags") {
  const TriMesh plane = iris3d::testing::plane_grid(20, 20, 0.5);
  const auto field = curv::curvature_field(plane);
  for (std::size_t i = 0; i < plane.vertices.size(); ++i) {
    CHECK(std::abs(field.k1[i]) < 1e-3 / 0.5);
    CHECK(std::abs(field.k2[i]) < 1e-3 / 0.5);
    CHECK(field.planar[i] == 1);
    CHECK(field.shape_index[i] == 0.0);
  }
}

TEST_CASE("paraboloid apex") {
  const TriMesh patch = iris3d::testing::paraboloid_patch(0.2, 0.05, 0.1, 4);
  const auto pc = curv::estimate_principal(patch, 0);
  CHECK(pc.k1 == doctest::Approx(0.2).epsilon(0.02));
  CHECK(pc.k2 == doctest::Approx(0.05).epsilon(0.02));
}

TEST_CASE("collinear neighbourhood reports the vertex") {
  TriMesh line;
  for (int i = 0; i < 30; ++i) line.vertices.points.emplace_back(i, 2 * i, 0);
  try {
    curv::estimate_principal(line, 7);
    FAIL("expected a VertexError");
  } catch (const VertexError& e) {
    CHECK(e.vertex() == 7);
  }
  CHECK_THROWS_AS(curv::curvature_field(line), InvariantError);
}

TEST_CASE("field keeps the healthy subset when few vertices fail") {
  TriMesh plane = iris3d::testing::plane_grid(20, 20, 1.0);
  // A distant collinear spur longer than k: its neighbourhoods are degenerate.
  for (int i = 0; i < 20; ++i) plane.vertices.points.emplace_back(1000 + i, 1000, 0);
  plane.vertices.compute_polar();
  const auto field = curv::curvature_field(plane);
  CHECK(field.failures.size() == 20);
  for (std::size_t i = 0; i < 400; ++i) CHECK(field.valid[i] == 1);
  for (std::size_t i = 400; i < 420; ++i) CHECK(field.valid[i] == 0);
}

TEST_CASE("shape index literal values and limits") {
  CHECK(curv::shape_index(1, -1).value == 0.0);
  CHECK(curv::shape_index(1, 0).value == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(curv::shape_index(0.3, 0.3).value == -1.0);
  CHECK(curv::shape_index(-0.3, -0.3).value == 1.0);
  const auto flat = curv::shape_index(0, 0);
  CHECK(flat.value == 0.0);
  CHECK(flat.planar);
  CHECK_THROWS_AS(curv::shape_index(0, 1), InvariantError);
}

TEST_CASE("shape index range and |E| = 1 only at umbilics") {
  Gen g(50);
  for (int i = 0; i < 20000; ++i) {
    double a = g.normal(std::pow(10.0, g.uniform(-6, 6))), b = g.normal(std::pow(10.0, g.uniform(-6, 6)));
    if (a < b) std::swap(a, b);
    const auto s = curv::shape_index(a, b);
    CHECK(s.value >= -1.0);
    CHECK(s.value <= 1.0);
    if (std::abs(s.value) == 1.0) CHECK(std::abs(a - b) <= 1e-12);
  }
}

TEST_CASE("field invariants on a phantom") {
  phantom::PhantomParams p;
  p.bow = 15;
  p.frill_amplitude = 3;
  pipeline::PipelineConfig cfg;
  cfg.geometry.slices = 32;
  const auto vol = phantom::phantom_slices(p, cfg.geometry);
  const auto cm = recon::coarse_mesh(recon::slices_to_cloud(vol.boundaries, cfg.geometry), 32);
  const auto f = curv::curvature_field(cm.mesh, pipeline::curvature_options(cfg));
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f.k1[i] >= f.k2[i]);
    CHECK(std::abs(f.gaussian[i] - f.k1[i] * f.k2[i]) <= 1e-12);
    CHECK(std::abs(f.mean[i] - 0.5 * (f.k1[i] + f.k2[i])) <= 1e-12);
    CHECK(std::abs(f.shape_index[i]) <= 1.0);
    if (f.planar[i]) CHECK(f.shape_index[i] == 0.0);
  }
}

TEST_CASE("curvature CSV round trip") {
  const TriMesh patch = iris3d::testing::paraboloid_patch(0.2, 0.05, 0.1, 3);
  const auto f = curv::curvature_field(patch);
  std::stringstream ss;
  curv::write_curvature_csv(ss, patch, f);
  const auto back = curv::read_curvature_csv(ss);
  REQUIRE(back.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(back.k1[i] == f.k1[i]);
    CHECK(back.shape_index[i] == f.shape_index[i]);
  }
}
