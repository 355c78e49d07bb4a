#include "iris3d/delaunay.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "iris3d/error.hpp"

namespace iris3d {

namespace {

// Error-bound coefficients for the first-stage filters of the classic
// adaptive predicates (epsilon = 2^-53).
constexpr double kEps = 1.1102230246251565e-16;
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIncircleBound = (10.0 + 96.0 * kEps) * kEps;

int sign_of(const mpq_class& v) { return sgn(v); }

int orient2d_exact(const Vec2& a, const Vec2& b, const Vec2& c) {
  const mpq_class acx = mpq_class(a.x()) - mpq_class(c.x());
  const mpq_class bcx = mpq_class(b.x()) - mpq_class(c.x());
  const mpq_class acy = mpq_class(a.y()) - mpq_class(c.y());
  const mpq_class bcy = mpq_class(b.y()) - mpq_class(c.y());
  return sign_of(mpq_class(acx * bcy - acy * bcx));
}

int incircle_exact(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const mpq_class dx(d.x()), dy(d.y());
  const mpq_class adx = mpq_class(a.x()) - dx, ady = mpq_class(a.y()) - dy;
  const mpq_class bdx = mpq_class(b.x()) - dx, bdy = mpq_class(b.y()) - dy;
  const mpq_class cdx = mpq_class(c.x()) - dx, cdy = mpq_class(c.y()) - dy;
  const mpq_class alift = adx * adx + ady * ady;
  const mpq_class blift = bdx * bdx + bdy * bdy;
  const mpq_class clift = cdx * cdx + cdy * cdy;
  const mpq_class det =
      alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady);
  return sign_of(det);
}

}  // namespace

int orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double detleft = (a.x() - c.x()) * (b.y() - c.y());
  const double detright = (a.y() - c.y()) * (b.x() - c.x());
  const double det = detleft - detright;
  const double bound = kOrientBound * (std::abs(detleft) + std::abs(detright));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return orient2d_exact(a, b, c);
}

int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = kIncircleBound * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return incircle_exact(a, b, c, d);
}

std::vector<Face> delaunay_2d(std::span<const Vec2> input) {
  const std::size_t n = input.size();
  for (const auto& p : input)
    if (!p.allFinite()) throw InvariantError("delaunay: non-finite point");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto lex = [&](std::size_t a, std::size_t b) {
    if (input[a].x() != input[b].x()) return input[a].x() < input[b].x();
    if (input[a].y() != input[b].y()) return input[a].y() < input[b].y();
    return a < b;
  };
  std::sort(order.begin(), order.end(), lex);
  order.erase(std::unique(order.begin(), order.end(),
                          [&](std::size_t a, std::size_t b) { return input[a] == input[b]; }),
              order.end());
  if (order.size() < 3) throw InvariantError("delaunay: need at least three distinct points");

  bool collinear = true;
  for (std::size_t i = 2; i < order.size() && collinear; ++i)
    collinear = orient2d(input[order[0]], input[order[1]], input[order[i]]) == 0;
  if (collinear) throw InvariantError("delaunay: all points are collinear");

  // Working vertex array: inputs followed by three enclosing super vertices.
  std::vector<Vec2> pts(input.begin(), input.end());
  Vec2 lo = input[order[0]], hi = lo;
  for (auto i : order) {
    lo = lo.cwiseMin(input[i]);
    hi = hi.cwiseMax(input[i]);
  }
  const Vec2 c = 0.5 * (lo + hi);
  const double m = 1e3 * std::max((hi - lo).maxCoeff(), std::numeric_limits<double>::min());
  const auto s0 = static_cast<std::uint32_t>(n);
  pts.emplace_back(c.x() - 20.0 * m, c.y() - m);
  pts.emplace_back(c.x() + 20.0 * m, c.y() - m);
  pts.emplace_back(c.x(), c.y() + 20.0 * m);

  struct Tri {
    Face v;
    bool alive;
  };
  std::vector<Tri> tris{{{s0, s0 + 1, s0 + 2}, true}};
  std::size_t alive = 1;

  std::vector<std::size_t> bad;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (auto pi : order) {
    const auto p = static_cast<std::uint32_t>(pi);
    bad.clear();
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!tris[t].alive) continue;
      const Face& f = tris[t].v;
      if (incircle(pts[f[0]], pts[f[1]], pts[f[2]], pts[p]) > 0) bad.push_back(t);
    }
    edges.clear();
    for (auto t : bad) {
      const Face& f = tris[t].v;
      for (int k = 0; k < 3; ++k) edges.emplace_back(f[k], f[(k + 1) % 3]);
      tris[t].alive = false;
    }
    alive -= bad.size();
    std::sort(edges.begin(), edges.end());
    for (const auto& e : edges) {
      if (std::binary_search(edges.begin(), edges.end(), std::make_pair(e.second, e.first))) continue;
      tris.push_back({{e.first, e.second, p}, true});
      ++alive;
    }
    if (tris.size() > 2 * alive + 64) {
      std::erase_if(tris, [](const Tri& t) { return !t.alive; });
    }
  }

  std::vector<Face> out;
  for (const auto& t : tris)
    if (t.alive && t.v[0] < s0 && t.v[1] < s0 && t.v[2] < s0) out.push_back(t.v);
  return out;
}

TriMesh retriangulate(const PointCloud3D& samples, double max_plan_edge) {
  if (samples.size() < 3) throw InvariantError("retriangulate: need at least three samples");
  std::vector<Vec2> plan;
  plan.reserve(samples.size());
  for (const auto& p : samples.points) plan.emplace_back(p.x(), p.y());

  TriMesh mesh;
  mesh.vertices = samples;
  if (!mesh.vertices.has_polar()) mesh.vertices.compute_polar();
  for (const Face& f : delaunay_2d(plan)) {
    if (max_plan_edge > 0.0) {
      bool too_long = false;
      for (int k = 0; k < 3; ++k)
        too_long = too_long || (plan[f[k]] - plan[f[(k + 1) % 3]]).norm() > max_plan_edge;
      if (too_long) continue;
    }
    mesh.faces.push_back(f);
  }
  return mesh;
}

}  // namespace iris3d
