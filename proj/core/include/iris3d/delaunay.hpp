#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "iris3d/mesh.hpp"

namespace iris3d {

using Vec2 = Eigen::Vector2d;

// Sign of the orientation determinant: +1 counter-clockwise, -1 clockwise,
// 0 collinear. Exact: floating-point filter with a rational fallback.
int orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

// +1 when d is strictly inside the circle through the counter-clockwise
// triangle (a,b,c), -1 strictly outside, 0 cocircular. Exact.
int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// Bowyer-Watson triangulation. Points are inserted in lexicographic (x,y)
// order and a point on an existing circumcircle leaves that triangle intact,
// so cocircular ties resolve in favour of the lexicographically earlier
// points. Duplicate points are skipped (left unreferenced). Triangles are
// counter-clockwise. Throws InvariantError for fewer than three distinct
// points or when all points are collinear.
std::vector<Face> delaunay_2d(std::span<const Vec2> points);

// Delaunay triangulation of the (x,y) projection lifted back onto the 3D
// samples. Faces with any plan-view edge longer than max_plan_edge are
// dropped (default: keep all).
TriMesh retriangulate(const PointCloud3D& samples, double max_plan_edge = 0.0);

}  // namespace iris3d
