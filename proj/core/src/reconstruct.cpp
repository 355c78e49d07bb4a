#include "iris3d/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <unordered_map>

#include "iris3d/error.hpp"

namespace iris3d::recon {

double ScanGeometry::slice_angle(std::size_t i) const {
  return static_cast<double>(i) * std::numbers::pi / static_cast<double>(slices);
}

void ScanGeometry::validate() const {
  if (slices < 4) throw InvariantError("scan geometry: need at least 4 slices");
  if (width == 0 || height == 0) throw InvariantError("scan geometry: zero image extent");
  if (!(s_xy > 0.0) || !(s_z > 0.0)) throw InvariantError("scan geometry: pixel scales must be positive");
}

void SamplingParams::validate() const {
  if (!(r1 > 0.0) || !(r1 < r2)) throw InvariantError("sampling: need 0 < r1 < r2");
  if (!(beta >= 2.0)) throw InvariantError("sampling: oversampling factor beta must be >= 2");
}

SamplingParams SamplingParams::scaled(double s_xy) const {
  SamplingParams p = *this;
  p.r1 *= s_xy;
  p.r2 *= s_xy;
  return p;
}

PointCloud3D slices_to_cloud(const SliceBoundarySet& boundaries, const ScanGeometry& geom) {
  geom.validate();
  PointCloud3D cloud;
  const double xc = geom.center_column();
  for (const auto& s : boundaries.slices) {
    if (s.slice_index >= geom.slices)
      throw InvariantError("slice index " + std::to_string(s.slice_index) + " outside scan of " +
                           std::to_string(geom.slices) + " slices");
    const double theta = geom.slice_angle(s.slice_index);
    for (const Polyline* line : {&s.left, &s.right})
      for (const auto& p : *line) {
        if (p.x < 0.0 || p.x > static_cast<double>(geom.width - 1) || p.z < 0.0 ||
            p.z > static_cast<double>(geom.height - 1))
          throw InvariantError("slice " + std::to_string(s.slice_index) + ": boundary point outside the image");
        const double rho = (p.x - xc) * geom.s_xy;
        const double phi = rho >= 0.0 ? theta : theta + std::numbers::pi;
        const double r = std::abs(rho);
        cloud.points.emplace_back(r * std::cos(phi), r * std::sin(phi), p.z * geom.s_z);
        cloud.azimuth.push_back(phi);
        cloud.radius.push_back(r);
      }
  }
  return cloud;
}

CoarseMesh coarse_mesh(const PointCloud3D& cloud, std::size_t meridian_samples) {
  if (meridian_samples < 2) throw InvariantError("coarse mesh: need at least 2 samples per meridian");
  PointCloud3D src = cloud;
  if (!src.has_polar()) src.compute_polar();

  std::vector<std::size_t> order(src.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (src.azimuth[a] != src.azimuth[b]) return src.azimuth[a] < src.azimuth[b];
    if (src.radius[a] != src.radius[b]) return src.radius[a] < src.radius[b];
    return a < b;
  });

  // Azimuths of one meridian are identical up to rounding.
  constexpr double kAzimuthTol = 1e-9;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (groups.empty() || src.azimuth[order[k]] - src.azimuth[groups.back().front()] > kAzimuthTol)
      groups.emplace_back();
    groups.back().push_back(order[k]);
  }
  // Points just below 2pi belong to the meridian at 0.
  if (groups.size() > 1 &&
      2.0 * std::numbers::pi - src.azimuth[groups.back().front()] + src.azimuth[groups.front().front()] <=
          kAzimuthTol) {
    auto tail = std::move(groups.back());
    groups.pop_back();
    groups.front().insert(groups.front().end(), tail.begin(), tail.end());
    std::sort(groups.front().begin(), groups.front().end(),
              [&](std::size_t a, std::size_t b) { return src.radius[a] < src.radius[b]; });
  }

  CoarseMesh out;
  const std::size_t m_count = meridian_samples;
  for (const auto& g : groups) {
    const double phi = src.azimuth[g.front()];
    if (g.size() < 2) {
      out.warnings.push_back("meridian at azimuth " + std::to_string(phi) + " has fewer than 2 points; skipped");
      continue;
    }
    std::vector<double> arc(g.size(), 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) arc[i] = arc[i - 1] + (src.points[g[i]] - src.points[g[i - 1]]).norm();
    const double length = arc.back();
    if (!(length > 0.0)) {
      out.warnings.push_back("meridian at azimuth " + std::to_string(phi) + " has zero length; skipped");
      continue;
    }
    std::size_t seg = 0;
    for (std::size_t j = 0; j < m_count; ++j) {
      const double t = length * static_cast<double>(j) / static_cast<double>(m_count - 1);
      while (seg + 2 < g.size() && arc[seg + 1] < t) ++seg;
      const double span = arc[seg + 1] - arc[seg];
      const double w = span > 0.0 ? std::clamp((t - arc[seg]) / span, 0.0, 1.0) : 0.0;
      out.mesh.vertices.points.push_back((1.0 - w) * src.points[g[seg]] + w * src.points[g[seg + 1]]);
    }
    ++out.meridians;
  }
  if (out.meridians < 3) throw InvariantError("coarse mesh: fewer than 3 usable meridians");
  out.samples_per_meridian = m_count;
  out.mesh.vertices.compute_polar();

  const auto idx = [&](std::size_t m, std::size_t j) { return static_cast<std::uint32_t>(m * m_count + j); };
  double scale2 = 0.0;
  for (const auto& p : out.mesh.vertices.points) scale2 = std::max(scale2, p.squaredNorm());
  const double min_area = 1e-14 * std::max(scale2, 1.0);
  for (std::size_t m = 0; m < out.meridians; ++m) {
    const std::size_t n = (m + 1) % out.meridians;
    for (std::size_t j = 0; j + 1 < m_count; ++j) {
      for (const Face f : {Face{idx(m, j), idx(n, j), idx(n, j + 1)}, Face{idx(m, j), idx(n, j + 1), idx(m, j + 1)}}) {
        out.mesh.faces.push_back(f);
        if (out.mesh.face_area(out.mesh.faces.size() - 1) <= min_area) out.mesh.faces.pop_back();
      }
    }
  }
  return out;
}

double adaptive_radius(double curvature, double mean_curvature, const SamplingParams& params) {
  return curvature > mean_curvature ? params.r1 : params.r2;
}

namespace {

struct CellHash {
  std::size_t operator()(std::int64_t k) const { return std::hash<std::int64_t>{}(k * 0x9E3779B97F4A7C15LL); }
};

std::int64_t cell_key(long ix, long iy, long iz) {
  constexpr long kOff = 1L << 20;
  return ((ix + kOff) << 42) | ((iy + kOff) << 21) | (iz + kOff);
}

}  // namespace

PoissonSamples poisson_disk_resample(const TriMesh& mesh, std::span<const double> curvature,
                                     const SamplingParams& params) {
  params.validate();
  const auto& pts = mesh.vertices.points;
  if (mesh.faces.empty() || pts.empty()) throw InvariantError("poisson sampling: empty mesh");
  if (curvature.size() != pts.size())
    throw InvariantError("poisson sampling: curvature array has " + std::to_string(curvature.size()) +
                         " entries for " + std::to_string(pts.size()) + " vertices");

  std::vector<double> cumulative(mesh.faces.size());
  double area = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    area += mesh.face_area(f);
    cumulative[f] = area;
  }
  if (!(area > 0.0)) throw InvariantError("poisson sampling: mesh has zero total area");
  const double mean = std::accumulate(curvature.begin(), curvature.end(), 0.0) / static_cast<double>(curvature.size());

  const auto pool = static_cast<std::size_t>(
      std::max(1.0, std::ceil(params.beta * area / (params.r2 * params.r2))));
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Vec3> cand(pool);
  std::vector<double> cand_r(pool);
  for (std::size_t i = 0; i < pool; ++i) {
    const double u = unit(rng) * area;
    auto f = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    f = std::min(f, mesh.faces.size() - 1);
    const Face& t = mesh.faces[f];
    const double s = std::sqrt(unit(rng));
    const double v = unit(rng);
    const Vec3 q = (1.0 - s) * pts[t[0]] + s * (1.0 - v) * pts[t[1]] + s * v * pts[t[2]];
    std::uint32_t nearest = t[0];
    for (auto k : t)
      if ((pts[k] - q).squaredNorm() < (pts[nearest] - q).squaredNorm()) nearest = k;
    cand[i] = q;
    cand_r[i] = adaptive_radius(curvature[nearest], mean, params);
  }
  std::vector<std::size_t> visit(pool);
  std::iota(visit.begin(), visit.end(), 0);
  std::shuffle(visit.begin(), visit.end(), rng);

  PoissonSamples out;
  out.candidates = pool;
  const double cell = params.r2;
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>, CellHash> grid;
  auto cell_of = [&](double c) { return static_cast<long>(std::floor(c / cell)); };
  for (auto i : visit) {
    const Vec3& q = cand[i];
    const long cx = cell_of(q.x()), cy = cell_of(q.y()), cz = cell_of(q.z());
    bool conflict = false;
    for (long dx = -1; dx <= 1 && !conflict; ++dx)
      for (long dy = -1; dy <= 1 && !conflict; ++dy)
        for (long dz = -1; dz <= 1 && !conflict; ++dz) {
          auto it = grid.find(cell_key(cx + dx, cy + dy, cz + dz));
          if (it == grid.end()) continue;
          for (auto s : it->second) {
            const double r = std::min(cand_r[i], out.radius[s]);
            if ((out.cloud.points[s] - q).squaredNorm() < r * r) {
              conflict = true;
              break;
            }
          }
        }
    if (conflict) continue;
    grid[cell_key(cx, cy, cz)].push_back(static_cast<std::uint32_t>(out.cloud.points.size()));
    out.cloud.points.push_back(q);
    out.radius.push_back(cand_r[i]);
  }
  out.cloud.compute_polar();
  return out;
}

}  // namespace iris3d::recon
