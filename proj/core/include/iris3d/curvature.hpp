#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "iris3d/error.hpp"
#include "iris3d/knn.hpp"
#include "iris3d/mesh.hpp"

namespace iris3d::curv {

struct CurvatureOptions {
  std::size_t k = 16;
  // Normals are flipped to have a positive component along `up`; curvature
  // is positive where the surface bends toward it.
  Vec3 up = Vec3::UnitZ();
};

struct PrincipalCurvatures {
  double k1 = 0.0;  // maximum
  double k2 = 0.0;  // minimum
};

// Local quadric h(u,v) = d u + e v + (L u^2 + 2 M u v + N v^2)/2 fitted by
// least squares to the k nearest vertices in the PCA tangent frame; the
// principal curvatures are the eigenvalues of the shape operator I^-1 II at
// the origin. Throws VertexError on a rank-deficient neighbourhood.
PrincipalCurvatures estimate_principal(const TriMesh& mesh, std::size_t vertex, const CurvatureOptions& opt = {});
PrincipalCurvatures estimate_principal(const TriMesh& mesh, const KdTree& tree, std::size_t vertex,
                                       const CurvatureOptions& opt = {});

struct ShapeIndex {
  double value = 0.0;
  bool planar = false;
};

// E = (2/pi) atan((k2 + k1) / (k2 - k1)) with k1 >= k2, taken literally, so a
// ridge k1 = 1, k2 = 0 maps to -0.5 and an umbilic with k1 = k2 > 0 to -1:
// the opposite sign of Koenderink's usual convention.
// Limits: |k1 - k2| <= eps and |k1 + k2| > eps gives -sign(k1 + k2);
// both <= eps gives 0 with the planar flag. Away from umbilics |E| < 1.
// Throws InvariantError if k1 < k2.
ShapeIndex shape_index(double k1, double k2, double eps = 1e-12);

struct CurvatureField {
  std::vector<double> k1, k2, gaussian, mean, shape_index;
  std::vector<std::uint8_t> planar;
  std::vector<std::uint8_t> valid;
  std::vector<VertexError> failures;

  std::size_t size() const { return k1.size(); }
  // max(|k1|, |k2|) per vertex; the driver for adaptive resampling.
  std::vector<double> max_abs() const;
};

// Runs estimate_principal + shape_index on every vertex. Vertices whose fit
// fails are recorded in `failures` and zero-filled with valid = 0; if more
// than 10% fail the call throws InvariantError.
CurvatureField curvature_field(const TriMesh& mesh, const CurvatureOptions& opt = {});

// CSV `vertex,x,y,z,k1,k2,K,H,E,planar`.
void write_curvature_csv(std::ostream& os, const TriMesh& mesh, const CurvatureField& field);
void write_curvature_csv(const std::filesystem::path& path, const TriMesh& mesh, const CurvatureField& field);
// Reads the columns back; positions are ignored. Rows must be in vertex order.
CurvatureField read_curvature_csv(std::istream& is);
CurvatureField read_curvature_csv(const std::filesystem::path& path);

}  // namespace iris3d::curv
