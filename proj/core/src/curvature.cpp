#include "iris3d/curvature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "iris3d/error.hpp"

namespace iris3d::curv {

PrincipalCurvatures estimate_principal(const TriMesh& mesh, std::size_t vertex, const CurvatureOptions& opt) {
  const KdTree tree(mesh.vertices.points);
  return estimate_principal(mesh, tree, vertex, opt);
}

PrincipalCurvatures estimate_principal(const TriMesh& mesh, const KdTree& tree, std::size_t vertex,
                                       const CurvatureOptions& opt) {
  const auto& pts = mesh.vertices.points;
  if (vertex >= pts.size()) throw VertexError(vertex, "index out of range");
  if (opt.k < 5) throw VertexError(vertex, "quadric fit needs k >= 5 neighbours");
  if (pts.size() < opt.k + 1)
    throw VertexError(vertex, "mesh has fewer than k+1 = " + std::to_string(opt.k + 1) + " vertices");

  const Vec3& origin = pts[vertex];
  std::vector<std::size_t> nbr = tree.nearest(origin, opt.k + 1);
  std::erase(nbr, vertex);
  if (nbr.size() > opt.k) nbr.resize(opt.k);

  Vec3 centroid = origin;
  for (auto i : nbr) centroid += pts[i];
  centroid /= static_cast<double>(nbr.size() + 1);
  Eigen::Matrix3d cov = (origin - centroid) * (origin - centroid).transpose();
  for (auto i : nbr) cov += (pts[i] - centroid) * (pts[i] - centroid).transpose();

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d ev = eig.eigenvalues();
  if (!(ev[2] > 0.0) || ev[1] <= 1e-10 * ev[2]) throw VertexError(vertex, "rank-deficient (collinear) neighbourhood");

  Vec3 n = eig.eigenvectors().col(0);
  if (n.dot(opt.up) < 0.0) n = -n;
  const Vec3 t1 = eig.eigenvectors().col(2);
  const Vec3 t2 = n.cross(t1);

  // Work in units of the neighbourhood radius for conditioning.
  double scale = 0.0;
  for (auto i : nbr) scale = std::max(scale, (pts[i] - origin).norm());
  if (!(scale > 0.0)) throw VertexError(vertex, "neighbourhood collapsed to a point");

  Eigen::MatrixXd a(static_cast<Eigen::Index>(nbr.size()), 5);
  Eigen::VectorXd b(static_cast<Eigen::Index>(nbr.size()));
  for (std::size_t r = 0; r < nbr.size(); ++r) {
    const Vec3 q = (pts[nbr[r]] - origin) / scale;
    const double u = q.dot(t1), v = q.dot(t2);
    const auto row = static_cast<Eigen::Index>(r);
    a.row(row) << u, v, 0.5 * u * u, u * v, 0.5 * v * v;
    b[row] = q.dot(n);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 5) throw VertexError(vertex, "rank-deficient quadric fit");
  const Eigen::VectorXd c = qr.solve(b);

  const double d = c[0], e = c[1];
  const double l = c[2] / scale, m = c[3] / scale, nn = c[4] / scale;
  const double ff_e = 1.0 + d * d, ff_f = d * e, ff_g = 1.0 + e * e;
  const double w = std::sqrt(1.0 + d * d + e * e);
  const double sl = l / w, sm = m / w, sn = nn / w;
  const double det = ff_e * ff_g - ff_f * ff_f;
  const double gauss = (sl * sn - sm * sm) / det;
  const double mean = (ff_e * sn - 2.0 * ff_f * sm + ff_g * sl) / (2.0 * det);
  const double disc = std::sqrt(std::max(0.0, mean * mean - gauss));
  return {mean + disc, mean - disc};
}

ShapeIndex shape_index(double k1, double k2, double eps) {
  if (k1 < k2) throw InvariantError("shape_index: k1 must be >= k2");
  const double diff = k2 - k1;
  const double sum = k2 + k1;
  if (std::abs(diff) > eps) {
    double e = (2.0 / std::numbers::pi) * std::atan(sum / diff);
    // atan saturates to pi/2 in double for huge ratios; keep |E| = 1 for umbilics only.
    const double below_one = std::nextafter(1.0, 0.0);
    if (std::abs(e) > below_one) e = std::copysign(below_one, e);
    return {e, false};
  }
  if (std::abs(sum) > eps) return {sum > 0.0 ? -1.0 : 1.0, false};
  return {0.0, true};
}

std::vector<double> CurvatureField::max_abs() const {
  std::vector<double> out(k1.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(std::abs(k1[i]), std::abs(k2[i]));
  return out;
}

namespace {

void fill_vertex(CurvatureField& f, std::size_t i, double k1, double k2) {
  f.k1[i] = k1;
  f.k2[i] = k2;
  f.gaussian[i] = k1 * k2;
  f.mean[i] = 0.5 * (k1 + k2);
  const ShapeIndex s = shape_index(k1, k2);
  f.shape_index[i] = s.value;
  f.planar[i] = s.planar ? 1 : 0;
}

void resize(CurvatureField& f, std::size_t n) {
  f.k1.assign(n, 0.0);
  f.k2.assign(n, 0.0);
  f.gaussian.assign(n, 0.0);
  f.mean.assign(n, 0.0);
  f.shape_index.assign(n, 0.0);
  f.planar.assign(n, 0);
  f.valid.assign(n, 0);
}

}  // namespace

CurvatureField curvature_field(const TriMesh& mesh, const CurvatureOptions& opt) {
  const std::size_t n = mesh.vertices.size();
  CurvatureField field;
  resize(field, n);
  const KdTree tree(mesh.vertices.points);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      const auto pc = estimate_principal(mesh, tree, i, opt);
      fill_vertex(field, i, pc.k1, pc.k2);
      field.valid[i] = 1;
    } catch (const VertexError& e) {
      field.failures.push_back(e);
    }
  }
  if (n == 0 || static_cast<double>(field.failures.size()) > 0.1 * static_cast<double>(n))
    throw InvariantError("curvature: " + std::to_string(field.failures.size()) + " of " + std::to_string(n) +
                         " vertices failed" + (field.failures.empty() ? "" : " (first: " +
                         std::string(field.failures.front().what()) + ")"));
  return field;
}

void write_curvature_csv(std::ostream& os, const TriMesh& mesh, const CurvatureField& field) {
  if (field.size() != mesh.vertices.size()) throw InvariantError("curvature csv: field/mesh size mismatch");
  os << "vertex,x,y,z,k1,k2,K,H,E,planar\n" << std::setprecision(17);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const Vec3& p = mesh.vertices.points[i];
    os << i << ',' << p.x() << ',' << p.y() << ',' << p.z() << ',' << field.k1[i] << ',' << field.k2[i] << ','
       << field.gaussian[i] << ',' << field.mean[i] << ',' << field.shape_index[i] << ','
       << static_cast<int>(field.planar[i]) << '\n';
  }
  if (!os) throw IoError("curvature csv: write failed");
}

void write_curvature_csv(const std::filesystem::path& path, const TriMesh& mesh, const CurvatureField& field) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_curvature_csv(os, mesh, field);
}

CurvatureField read_curvature_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("vertex,x,y,z,k1,k2,K,H,E,planar", 0) != 0)
    throw IoError("curvature csv: unexpected header");
  CurvatureField f;
  std::size_t expected = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::string cell[10];
    for (auto& c : cell)
      if (!std::getline(ls, c, ',')) throw IoError("curvature csv: short row " + std::to_string(expected));
    try {
      if (std::stoul(cell[0]) != expected) throw IoError("curvature csv: rows out of vertex order");
      f.k1.push_back(std::stod(cell[4]));
      f.k2.push_back(std::stod(cell[5]));
      f.gaussian.push_back(std::stod(cell[6]));
      f.mean.push_back(std::stod(cell[7]));
      f.shape_index.push_back(std::stod(cell[8]));
      f.planar.push_back(static_cast<std::uint8_t>(std::stoi(cell[9]) != 0));
      f.valid.push_back(1);
    } catch (const IoError&) {
      throw;
    } catch (const std::exception&) {
      throw IoError("curvature csv: malformed row " + std::to_string(expected));
    }
    ++expected;
  }
  return f;
}

CurvatureField read_curvature_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_curvature_csv(is);
}

}  // namespace iris3d::curv
