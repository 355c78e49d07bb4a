#pragma once

#include <span>
#include <vector>

#include "iris3d/mesh.hpp"

namespace iris3d {

// Static 3D kd-tree over a borrowed point array.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  // Indices of the k nearest points to q, nearest first. Ties broken by
  // index. Returns fewer than k when the tree is smaller.
  std::vector<std::size_t> nearest(const Vec3& q, std::size_t k) const;
  std::size_t nearest_one(const Vec3& q) const;

 private:
  struct Node {
    std::size_t begin, end;  // range in index_
    int axis;                // -1 for leaves
    double split;
    std::size_t left, right;
  };
  std::size_t build(std::size_t begin, std::size_t end, int depth);

  std::span<const Vec3> pts_;
  std::vector<std::size_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace iris3d
