#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kentreg/geometry.hpp"

namespace kentreg {

// Static 3D k-d tree with exact k-nearest-neighbour queries.
class KdTree {
 public:
  struct Neighbor {
    Eigen::Index index;
    double squared_distance;
  };

  explicit KdTree(Points3 points, int leaf_size = 8);

  Eigen::Index size() const { return points_.cols(); }
  const Points3& points() const { return points_; }

  // The k nearest points, closest first. Ties are broken by index.
  std::vector<Neighbor> knn(const Vec3& query, Eigen::Index k) const;
  Neighbor nearest(const Vec3& query) const;

 private:
  struct Node {
    std::int32_t begin = 0, end = 0;  // range into order_ (leaves only)
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::int32_t begin, std::int32_t end);
  void search(std::int32_t node, const Vec3& query, Eigen::Index k,
              std::vector<Neighbor>& heap) const;

  Points3 points_;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
  int leaf_size_;
};

}  // namespace kentreg
