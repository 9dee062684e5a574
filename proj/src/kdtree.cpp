#include "kentreg/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace kentreg {

namespace {

bool closer(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
  return a.squared_distance < b.squared_distance ||
         (a.squared_distance == b.squared_distance && a.index < b.index);
}

}  // namespace

KdTree::KdTree(Points3 points, int leaf_size)
    : points_(std::move(points)), leaf_size_(std::max(1, leaf_size)) {
  order_.resize(static_cast<std::size_t>(points_.cols()));
  std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  if (!order_.empty()) build(0, static_cast<std::int32_t>(order_.size()));
}

std::int32_t KdTree::build(std::int32_t begin, std::int32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, -1, 0.0});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (auto i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_.col(order_[i]));
    hi = hi.cwiseMax(points_.col(order_[i]));
  }
  int axis;
  if ((hi - lo).maxCoeff(&axis) <= 0.0) return id;  // all coincident

  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Eigen::Index a, Eigen::Index b) {
                     return points_(axis, a) < points_(axis, b);
                   });
  const double split = points_(axis, order_[mid]);
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::int32_t id, const Vec3& query, Eigen::Index k,
                    std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const Eigen::Index idx = order_[i];
      const Neighbor cand{idx, (points_.col(idx) - query).squaredNorm()};
      if (static_cast<Eigen::Index>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double diff = query(node.axis) - node.split;
  const auto near = diff < 0 ? node.left : node.right;
  const auto far = diff < 0 ? node.right : node.left;
  search(near, query, k, heap);
  if (static_cast<Eigen::Index>(heap.size()) < k ||
      diff * diff <= heap.front().squared_distance)
    search(far, query, k, heap);
}

std::vector<KdTree::Neighbor> KdTree::knn(const Vec3& query, Eigen::Index k) const {
  std::vector<Neighbor> heap;
  k = std::min(k, size());
  if (k <= 0) return heap;
  heap.reserve(static_cast<std::size_t>(k));
  search(0, query, k, heap);
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

KdTree::Neighbor KdTree::nearest(const Vec3& query) const {
  const auto found = knn(query, 1);
  if (found.empty()) throw TooFewPoints("nearest-neighbour query on an empty tree");
  return found.front();
}

}  // namespace kentreg
