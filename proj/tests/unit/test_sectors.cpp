#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include <Eigen/Geometry>
#include <sstream>

#include "generators.hpp"
#include "iris3d/error.hpp"
#include "iris3d/phantom.hpp"
#include "iris3d/pipeline.hpp"
#include "iris3d/reconstruct.hpp"
#include "iris3d/sectors.hpp"
#include "oracles.hpp"

using namespace iris3d;
using iris3d::testing::Gen;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Random points on a bowed surface, kept 0.5 degrees away from sector edges.
TriMesh sector_cloud(Gen& g, std::size_t per_sector, std::span<const int> sectors) {
  TriMesh m;
  for (int s : sectors)
    for (std::size_t i = 0; i < per_sector; ++i) {
      const double phi = (15.0 * s + g.uniform(0.5, 14.5)) * kDeg, r = g.uniform(50, 200);
      m.vertices.points.emplace_back(r * std::cos(phi), r * std::sin(phi), 0.001 * r * r);
    }
  m.vertices.compute_polar();
  return m;
}

curv::CurvatureField fake_field(Gen& g, std::size_t n) {
  curv::CurvatureField f;
  for (std::size_t i = 0; i < n; ++i) {
    double a = g.normal(0.01), b = g.normal(0.01);
    if (a < b) std::swap(a, b);
    f.k1.push_back(a);
    f.k2.push_back(b);
    f.gaussian.push_back(a * b);
    f.mean.push_back(0.5 * (a + b));
    f.shape_index.push_back(curv::shape_index(a, b).value);
    f.planar.push_back(0);
    f.valid.push_back(1);
  }
  return f;
}

std::vector<int> all_sectors() {
  std::vector<int> s(24);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

}  // namespace

TEST_CASE("sector assignment uses half-open 15 degree bins") {
  CHECK(sectors::assign_sector(7 * kDeg) == 0);
  CHECK(sectors::assign_sector(359.9 * kDeg) == 23);
  CHECK(sectors::assign_sector(15.0 * std::numbers::pi / 180.0) == 1);
  CHECK(sectors::assign_sector(-1 * kDeg) == 23);
  CHECK(sectors::assign_sector(2 * std::numbers::pi) == 0);
  for (int s = 0; s < 24; ++s) CHECK(sectors::assign_sector((15.0 * s + 7.5) * kDeg) == s);
}

TEST_CASE("uniform coverage gives 24 samples of exactly N rows") {
  Gen g(60);
  const auto ids = all_sectors();
  const TriMesh m = sector_cloud(g, 300, ids);
  const auto f = fake_field(g, m.vertices.size());
  const int label = 1;
  sectors::SectorOptions opt;
  opt.n = 64;
  const auto b = sectors::build_sector_samples(m, f, std::span<const int>(&label, 1), opt);
  REQUIRE(b.samples.size() == 24);
  std::size_t total = 0;
  for (std::size_t s = 0; s < 24; ++s) {
    const auto& smp = b.samples[s];
    CHECK(smp.sector_id == static_cast<int>(s));
    CHECK(smp.rows() == 64);
    CHECK(smp.label == 1);
    double mean[3] = {0, 0, 0}, maxnorm = 0.0;
    for (std::size_t r = 0; r < smp.rows(); ++r) {
      for (std::size_t c = 0; c < 3; ++c) mean[c] += smp.at(r, c);
      maxnorm = std::max(maxnorm, std::hypot(smp.at(r, 0), smp.at(r, 1), smp.at(r, 2)));
    }
    for (double v : mean) CHECK(std::abs(v / 64.0) < 1e-12);
    CHECK(maxnorm == doctest::Approx(1.0).epsilon(1e-12));
    total += b.raw_counts[s];
  }
  CHECK(total == m.vertices.size());
}

TEST_CASE("raw azimuths agree with the sample's sector") {
  Gen g(61);
  const auto ids = all_sectors();
  const TriMesh m = sector_cloud(g, 20, ids);
  const auto f = fake_field(g, m.vertices.size());
  const int label = 0;
  sectors::SectorOptions opt;
  opt.n = 32;
  const auto b = sectors::build_sector_samples(m, f, std::span<const int>(&label, 1), opt);
  for (const auto& smp : b.samples) {
    CHECK(smp.raw_count == 20);
    // Bootstrap rows reuse sector vertices, so every curvature row is a k1 of that sector.
    for (std::size_t r = 0; r < smp.rows(); ++r) {
      bool found = false;
      for (std::size_t v = 0; v < m.vertices.size(); ++v)
        if (f.k1[v] == smp.at(r, 3)) found = found || sectors::assign_sector(m.vertices.azimuth[v]) == smp.sector_id;
      CHECK(found);
    }
  }
}

TEST_CASE("only sector 3 covered: 23 errors in permissive mode") {
  Gen g(62);
  const std::vector<int> ids{3};
  const TriMesh m = sector_cloud(g, 50, ids);
  const auto f = fake_field(g, m.vertices.size());
  const int label = -1;
  sectors::SectorOptions opt;
  opt.n = 16;
  CHECK_THROWS_AS(sectors::build_sector_samples(m, f, std::span<const int>(&label, 1), opt), SectorError);
  opt.permissive = true;
  const auto b = sectors::build_sector_samples(m, f, std::span<const int>(&label, 1), opt);
  CHECK(b.samples.size() == 1);
  CHECK(b.samples[0].sector_id == 3);
  REQUIRE(b.errors.size() == 23);
  for (const auto& e : b.errors) CHECK(e.sector() != 3);
}

TEST_CASE("farthest-point subsample spreads wider than a random one on phantom data") {
  phantom::PhantomParams p;
  p.bow = 20;
  p.frill_amplitude = 3;
  recon::ScanGeometry geom;
  const auto vol = phantom::phantom_slices(p, geom);
  const auto cm = recon::coarse_mesh(recon::slices_to_cloud(vol.boundaries, geom), 128);
  std::vector<Vec3> sector;
  for (std::size_t i = 0; i < cm.mesh.vertices.size(); ++i)
    if (sectors::assign_sector(cm.mesh.vertices.azimuth[i]) == 5) sector.push_back(cm.mesh.vertices.points[i]);
  REQUIRE(sector.size() >= 1000);
  sector.resize(1000);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto fps = sectors::farthest_point_subsample(sector, 256, seed);
    const auto rnd = sectors::random_subsample(sector.size(), 256, seed);
    std::vector<Vec3> a, b;
    for (auto i : fps) a.push_back(sector[i]);
    for (auto i : rnd) b.push_back(sector[i]);
    CHECK(std::set<std::size_t>(fps.begin(), fps.end()).size() == 256);
    CHECK(iris3d::testing::min_pairwise_distance(a) >= iris3d::testing::min_pairwise_distance(b));
  }
}

TEST_CASE("rotating by k sectors shifts ids and rotates coordinates") {
  Gen g(63);
  const auto ids = all_sectors();
  const TriMesh m = sector_cloud(g, 120, ids);
  const auto f = fake_field(g, m.vertices.size());
  std::vector<int> labels(24);
  for (int s = 0; s < 24; ++s) labels[static_cast<std::size_t>(s)] = s % 2;
  sectors::SectorOptions opt;
  opt.n = 48;
  const auto base = sectors::build_sector_samples(m, f, labels, opt);
  for (int k : {1, 5}) {
    const double a = 15.0 * k * kDeg;
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
    TriMesh r = m;
    for (auto& v : r.vertices.points) v = rot * v;
    r.vertices.compute_polar();
    std::vector<int> shifted(24);
    for (int s = 0; s < 24; ++s) shifted[static_cast<std::size_t>((s + k) % 24)] = labels[static_cast<std::size_t>(s)];
    const auto moved = sectors::build_sector_samples(r, f, shifted, opt);
    for (int s = 0; s < 24; ++s) {
      const auto& before = base.samples[static_cast<std::size_t>(s)];
      const auto& after = moved.samples[static_cast<std::size_t>((s + k) % 24)];
      CHECK(after.sector_id == (s + k) % 24);
      CHECK(after.label == before.label);
      for (std::size_t row = 0; row < before.rows(); ++row) {
        const Vec3 want = rot * Vec3(before.at(row, 0), before.at(row, 1), before.at(row, 2));
        CHECK((want - Vec3(after.at(row, 0), after.at(row, 1), after.at(row, 2))).norm() < 1e-9);
        for (std::size_t c = 3; c < sectors::kChannels; ++c) CHECK(after.at(row, c) == before.at(row, c));
      }
    }
  }
}

TEST_CASE("dataset JSON lines round trip") {
  Gen g(64);
  sectors::SectorSample s;
  s.sector_id = 11;
  s.label = 1;
  s.volume_id = "v7";
  s.seed = 42;
  for (int i = 0; i < 4 * 8; ++i) s.points.push_back(g.normal());
  sectors::SectorSample u = s;
  u.label = -1;
  std::stringstream ss;
  sectors::write_dataset(ss, {s, u});
  CHECK(ss.str().find("\"label\":null") != std::string::npos);
  const auto back = sectors::read_dataset(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].points == s.points);
  CHECK(back[0].sector_id == 11);
  CHECK(back[0].label == 1);
  CHECK(back[1].label == -1);
  CHECK(back[0].volume_id == "v7");
  std::stringstream bad("{\"sector_id\": 1, \"label\": 0, \"points\": [[1,2,3]]}\n");
  CHECK_THROWS_AS(sectors::read_dataset(bad), IoError);
}
