#include "iris3d/knn.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <utility>

namespace iris3d {

namespace {
constexpr std::size_t kLeafSize = 12;
}

KdTree::KdTree(std::span<const Vec3> points) : pts_(points), index_(points.size()) {
  std::iota(index_.begin(), index_.end(), 0);
  if (!index_.empty()) build(0, index_.size(), 0);
}

std::size_t KdTree::build(std::size_t begin, std::size_t end, int depth) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end, -1, 0.0, 0, 0});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = pts_[index_[begin]], hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(pts_[index_[i]]);
    hi = hi.cwiseMax(pts_[index_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(index_.begin() + static_cast<long>(begin), index_.begin() + static_cast<long>(mid),
                   index_.begin() + static_cast<long>(end), [&](std::size_t a, std::size_t b) {
                     return pts_[a][axis] < pts_[b][axis] || (pts_[a][axis] == pts_[b][axis] && a < b);
                   });
  const double split = pts_[index_[mid]][axis];
  const std::size_t l = build(begin, mid, depth + 1);
  const std::size_t r = build(mid, end, depth + 1);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

std::vector<std::size_t> KdTree::nearest(const Vec3& q, std::size_t k) const {
  using Entry = std::pair<double, std::size_t>;  // (squared distance, index); max-heap
  std::priority_queue<Entry> heap;
  if (nodes_.empty() || k == 0) return {};

  auto visit = [&](auto&& self, std::size_t node) -> void {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const std::size_t idx = index_[i];
        const Entry e{(pts_[idx] - q).squaredNorm(), idx};
        if (heap.size() < k)
          heap.push(e);
        else if (e < heap.top()) {
          heap.pop();
          heap.push(e);
        }
      }
      return;
    }
    const double diff = q[n.axis] - n.split;
    const std::size_t near = diff < 0.0 ? n.left : n.right;
    const std::size_t far = diff < 0.0 ? n.right : n.left;
    self(self, near);
    if (heap.size() < k || diff * diff <= heap.top().first) self(self, far);
  };
  visit(visit, 0);

  std::vector<Entry> found;
  found.reserve(heap.size());
  while (!heap.empty()) {
    found.push_back(heap.top());
    heap.pop();
  }
  std::sort(found.begin(), found.end());
  std::vector<std::size_t> out;
  out.reserve(found.size());
  for (const auto& e : found) out.push_back(e.second);
  return out;
}

std::size_t KdTree::nearest_one(const Vec3& q) const { return nearest(q, 1).at(0); }

}  // namespace iris3d
