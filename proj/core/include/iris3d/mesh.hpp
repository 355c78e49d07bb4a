#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

namespace iris3d {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::uint32_t, 3>;

// Points in length units. azimuth/radius are either empty or hold one entry
// per point: azimuth in [0, 2pi) about the optical (z) axis, radius the
// distance from that axis.
struct PointCloud3D {
  std::vector<Vec3> points;
  std::vector<double> azimuth;
  std::vector<double> radius;

  std::size_t size() const { return points.size(); }
  bool has_polar() const { return !points.empty() && azimuth.size() == points.size() && radius.size() == points.size(); }
  // Recomputes azimuth/radius from x,y.
  void compute_polar();
  // Throws InvariantError on non-finite coordinates or inconsistent polar data.
  void validate(double polar_tol = 1e-9) const;
};

double wrap_angle(double phi);  // into [0, 2pi)

struct TriMesh {
  PointCloud3D vertices;
  std::vector<Face> faces;

  double face_area(std::size_t f) const;
  double total_area() const;
  // Index range, non-degenerate faces, every undirected edge on <= 2 faces.
  // Throws InvariantError naming the first violation.
  void validate(double min_area = 0.0) const;
};

// True when every undirected edge is shared by at most two faces.
bool edges_manifold(const TriMesh& mesh);

}  // namespace iris3d
