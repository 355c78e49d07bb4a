#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "iris3d/mesh.hpp"

namespace iris3d {

// Extra per-vertex float property written after x,y,z.
struct VertexProperty {
  std::string name;
  std::vector<double> values;
};

struct PlyMesh {
  TriMesh mesh;
  std::vector<VertexProperty> properties;
};

// ASCII PLY 1.0: vertex x,y,z (+ extra float properties), face
// `list uchar int vertex_indices`.
void write_ply(std::ostream& os, const TriMesh& mesh, const std::vector<VertexProperty>& extra = {});
void write_ply(const std::filesystem::path& path, const TriMesh& mesh, const std::vector<VertexProperty>& extra = {});

// Reads ASCII PLY with scalar vertex properties (x,y,z required) and
// triangular faces. Throws IoError on anything else.
PlyMesh read_ply(std::istream& is);
PlyMesh read_ply(const std::filesystem::path& path);

}  // namespace iris3d
