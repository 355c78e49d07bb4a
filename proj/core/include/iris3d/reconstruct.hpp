#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iris3d/boundary.hpp"
#include "iris3d/mesh.hpp"

namespace iris3d::recon {

// Radial scan layout: slice i is the plane through the optical axis at angle
// i*pi/slices; image column width/2 sits on the axis.
struct ScanGeometry {
  std::size_t slices = 128;
  std::size_t width = 512;
  std::size_t height = 256;
  double s_xy = 1.0;  // length units per pixel, lateral
  double s_z = 1.0;   // length units per pixel, depth

  double center_column() const { return static_cast<double>(width) / 2.0; }
  double slice_angle(std::size_t i) const;
  void validate() const;
};

// Radii are given in pixel units; scaled(s_xy) converts them to the length
// units poisson_disk_resample works in.
struct SamplingParams {
  double r1 = 6.0;     // radius where curvature exceeds the global mean
  double r2 = 10.0;    // radius elsewhere
  double beta = 10.0;  // candidate oversampling factor
  std::uint64_t seed = 1;

  void validate() const;
  SamplingParams scaled(double s_xy) const;
};

// Each boundary point (x, z) becomes (|rho| cos phi, |rho| sin phi, z*s_z)
// with signed radius rho = (x - x_c) * s_xy and phi = theta_i, or
// theta_i + pi for rho < 0.
PointCloud3D slices_to_cloud(const SliceBoundarySet& boundaries, const ScanGeometry& geom);

struct CoarseMesh {
  TriMesh mesh;
  std::size_t meridians = 0;
  std::size_t samples_per_meridian = 0;
  std::vector<std::string> warnings;
};

// Groups points into meridians by azimuth, resamples every meridian to M
// points by arc length (ordered by radius), and stitches neighbouring
// meridians, including the wrap-around pair, into triangle strips. Vertex
// (m, j) has index m*M + j.
CoarseMesh coarse_mesh(const PointCloud3D& cloud, std::size_t meridian_samples = 64);

struct PoissonSamples {
  PointCloud3D cloud;
  std::vector<double> radius;  // disk radius assigned to each accepted sample
  std::size_t candidates = 0;
};

// Curvature-adaptive dart throwing on the mesh surface. A candidate pool of
// ceil(beta*A/r2^2) area-uniform points is visited in seeded random order; a
// candidate q is kept unless some kept s has |q - s| < min(r(q), r(s)), where
// r = r1 if the curvature of the nearest face vertex exceeds the mean of
// `curvature`, else r2. Radii are taken in world units (already scaled).
PoissonSamples poisson_disk_resample(const TriMesh& mesh, std::span<const double> curvature,
                                     const SamplingParams& params);

// Radius per candidate used by poisson_disk_resample, exposed for checking.
double adaptive_radius(double curvature, double mean_curvature, const SamplingParams& params);

}  // namespace iris3d::recon
