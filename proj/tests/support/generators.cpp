#include "generators.hpp"

#include <cmath>
#include <numbers>

namespace iris3d::testing {

nn::Tensor Gen::tensor(const nn::Shape& shape, double lo, double hi) {
  std::vector<double> v(nn::shape_numel(shape));
  for (auto& x : v) x = uniform(lo, hi);
  return nn::Tensor(shape, std::move(v));
}

SegMask Gen::mask(std::size_t w, std::size_t h, double density) {
  SegMask m(w, h);
  for (auto& l : m.labels) l = coin(density) ? 1 : 0;
  return m;
}

Polyline Gen::polyline(int x0, int x1, double zmax) {
  Polyline p;
  for (int x = x0; x <= x1; ++x) p.push_back({static_cast<double>(x), uniform(0.0, zmax)});
  return p;
}

std::vector<Vec3> Gen::points_in_box(std::size_t n, double half_extent) {
  std::vector<Vec3> out(n);
  for (auto& p : out) p = Vec3(uniform(-half_extent, half_extent), uniform(-half_extent, half_extent),
                               uniform(-half_extent, half_extent));
  return out;
}

TriMesh sphere_cap(double r, double max_polar_angle, double per_radian) {
  // Hemisphere area fraction 1 - cos(max angle) of 4 pi r^2, sampled at
  // spacing r / per_radian.
  const double spacing = r / per_radian;
  const double area = 2.0 * std::numbers::pi * r * r * (1.0 - std::cos(max_polar_angle));
  const auto n = static_cast<std::size_t>(area / (spacing * spacing));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  TriMesh m;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (1.0 - std::cos(max_polar_angle)) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double s = std::sqrt(1.0 - z * z);
    const double phi = golden * static_cast<double>(i);
    m.vertices.points.emplace_back(r * s * std::cos(phi), r * s * std::sin(phi), r * z);
  }
  m.vertices.compute_polar();
  return m;
}

TriMesh paraboloid_patch(double a, double b, double h, int n) {
  TriMesh m;
  m.vertices.points.emplace_back(0.0, 0.0, 0.0);
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      if (i == 0 && j == 0) continue;
      const double u = i * h, v = j * h;
      m.vertices.points.emplace_back(u, v, 0.5 * (a * u * u + b * v * v));
    }
  m.vertices.compute_polar();
  return m;
}

TriMesh plane_grid(int nx, int ny, double h) {
  TriMesh m;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) m.vertices.points.emplace_back(i * h, j * h, 0.0);
  const auto id = [&](int i, int j) { return static_cast<std::uint32_t>(j * nx + i); };
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  m.vertices.compute_polar();
  return m;
}

}  // namespace iris3d::testing
