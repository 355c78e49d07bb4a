#include "iris3d/mesh.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "iris3d/error.hpp"

namespace iris3d {

double wrap_angle(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(phi, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

void PointCloud3D::compute_polar() {
  azimuth.resize(points.size());
  radius.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    azimuth[i] = wrap_angle(std::atan2(points[i].y(), points[i].x()));
    radius[i] = std::hypot(points[i].x(), points[i].y());
  }
}

void PointCloud3D::validate(double polar_tol) const {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!points[i].allFinite()) throw InvariantError("point " + std::to_string(i) + " has non-finite coordinates");
  if (azimuth.empty() && radius.empty()) return;
  if (!has_polar()) throw InvariantError("point cloud polar arrays do not match the point count");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = radius[i] * std::cos(azimuth[i]);
    const double y = radius[i] * std::sin(azimuth[i]);
    const double scale = std::max(1.0, radius[i]);
    if (radius[i] < 0.0 || std::abs(x - points[i].x()) > polar_tol * scale ||
        std::abs(y - points[i].y()) > polar_tol * scale)
      throw InvariantError("point " + std::to_string(i) + " polar coordinates inconsistent with x,y");
  }
}

double TriMesh::face_area(std::size_t f) const {
  const auto& p = vertices.points;
  const Face& t = faces[f];
  return 0.5 * (p[t[1]] - p[t[0]]).cross(p[t[2]] - p[t[0]]).norm();
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) a += face_area(f);
  return a;
}

void TriMesh::validate(double min_area) const {
  vertices.validate();
  const std::size_t n = vertices.size();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (auto v : faces[f])
      if (v >= n) throw InvariantError("face " + std::to_string(f) + " references vertex " + std::to_string(v));
    if (faces[f][0] == faces[f][1] || faces[f][1] == faces[f][2] || faces[f][0] == faces[f][2] ||
        face_area(f) <= min_area)
      throw InvariantError("face " + std::to_string(f) + " is degenerate");
  }
  if (!edges_manifold(*this)) throw InvariantError("mesh has an edge shared by more than two faces");
}

bool edges_manifold(const TriMesh& mesh) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(mesh.faces.size() * 3);
  for (const Face& t : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      auto a = t[k], b = t[(k + 1) % 3];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  std::sort(edges.begin(), edges.end());
  std::size_t run = 1;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    run = edges[i] == edges[i - 1] ? run + 1 : 1;
    if (run > 2) return false;
  }
  return true;
}

}  // namespace iris3d
