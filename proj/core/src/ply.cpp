#include "iris3d/ply.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "iris3d/error.hpp"

namespace iris3d {

void write_ply(std::ostream& os, const TriMesh& mesh, const std::vector<VertexProperty>& extra) {
  const std::size_t n = mesh.vertices.size();
  for (const auto& p : extra)
    if (p.values.size() != n) throw InvariantError("ply: property '" + p.name + "' has wrong length");
  os << "ply\nformat ascii 1.0\n";
  os << "element vertex " << n << '\n';
  os << "property double x\nproperty double y\nproperty double z\n";
  for (const auto& p : extra) os << "property double " << p.name << '\n';
  os << "element face " << mesh.faces.size() << '\n';
  os << "property list uchar int vertex_indices\nend_header\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& v = mesh.vertices.points[i];
    os << v.x() << ' ' << v.y() << ' ' << v.z();
    for (const auto& p : extra) os << ' ' << p.values[i];
    os << '\n';
  }
  for (const Face& f : mesh.faces) os << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  if (!os) throw IoError("ply: write failed");
}

void write_ply(const std::filesystem::path& path, const TriMesh& mesh, const std::vector<VertexProperty>& extra) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_ply(os, mesh, extra);
}

PlyMesh read_ply(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("ply", 0) != 0) throw IoError("ply: missing magic");
  std::size_t nv = 0, nf = 0;
  std::vector<std::string> vprops;
  enum class Section { none, vertex, face, other } section = Section::none;
  bool ascii = false, have_list = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "end_header") break;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (key == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      if (name == "vertex") {
        section = Section::vertex;
        nv = count;
      } else if (name == "face") {
        section = Section::face;
        nf = count;
      } else {
        if (count) throw IoError("ply: unsupported element '" + name + "'");
        section = Section::other;
      }
    } else if (key == "property") {
      std::string type;
      ls >> type;
      if (section == Section::vertex) {
        if (type == "list") throw IoError("ply: list vertex properties unsupported");
        std::string name;
        ls >> name;
        vprops.push_back(name);
      } else if (section == Section::face) {
        if (type != "list") throw IoError("ply: face element must be a list");
        have_list = true;
      }
    }
  }
  if (!ascii) throw IoError("ply: only ascii format is supported");
  if (nf && !have_list) throw IoError("ply: face element without index list");

  int ix = -1, iy = -1, iz = -1;
  for (std::size_t i = 0; i < vprops.size(); ++i) {
    if (vprops[i] == "x") ix = static_cast<int>(i);
    if (vprops[i] == "y") iy = static_cast<int>(i);
    if (vprops[i] == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw IoError("ply: vertex element needs x, y and z");

  PlyMesh out;
  for (std::size_t i = 0; i < vprops.size(); ++i)
    if (static_cast<int>(i) != ix && static_cast<int>(i) != iy && static_cast<int>(i) != iz)
      out.properties.push_back({vprops[i], {}});

  std::vector<double> row(vprops.size());
  for (std::size_t v = 0; v < nv; ++v) {
    for (auto& x : row)
      if (!(is >> x)) throw IoError("ply: truncated vertex data at vertex " + std::to_string(v));
    out.mesh.vertices.points.emplace_back(row[static_cast<std::size_t>(ix)], row[static_cast<std::size_t>(iy)],
                                          row[static_cast<std::size_t>(iz)]);
    std::size_t k = 0;
    for (std::size_t i = 0; i < vprops.size(); ++i)
      if (static_cast<int>(i) != ix && static_cast<int>(i) != iy && static_cast<int>(i) != iz)
        out.properties[k++].values.push_back(row[i]);
  }
  for (std::size_t f = 0; f < nf; ++f) {
    int count = 0;
    if (!(is >> count)) throw IoError("ply: truncated face data at face " + std::to_string(f));
    if (count != 3) throw IoError("ply: only triangular faces are supported");
    Face t{};
    for (auto& idx : t) {
      long long v = 0;
      if (!(is >> v) || v < 0 || static_cast<std::size_t>(v) >= nv)
        throw IoError("ply: bad vertex index in face " + std::to_string(f));
      idx = static_cast<std::uint32_t>(v);
    }
    out.mesh.faces.push_back(t);
  }
  out.mesh.vertices.compute_polar();
  return out;
}

PlyMesh read_ply(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_ply(is);
}

}  // namespace iris3d
