#pragma once

#include <vector>

#include "kentreg/geometry.hpp"

namespace kentreg {

struct NormalEstimationConfig {
  int k_neighbors = 15;
  Vec3 viewpoint = Vec3::Zero();
  // Normals whose cosine to the mean direction falls below this are removed.
  double cosine_threshold = 0.0;
};

// PCA normals from the k nearest neighbours of every point (the point itself
// included), oriented so that n . (viewpoint - x) > 0. A zero dot product
// keeps the PCA sign.
//
// Points whose neighbourhood is degenerate (covariance rank < 2) receive no
// normal and are omitted from the returned cloud. Throws TooFewPoints unless
// the cloud has more than k_neighbors points, and Error when k_neighbors < 3.
PointCloud estimate_normals(const PointCloud& cloud, const NormalEstimationConfig& cfg);

struct DirectionalSplit {
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::Index> removed;
};

// Cosine-similarity filter against the mean direction of the whole input.
// The mean is computed once, before filtering. Throws DegenerateMean when the
// normals sum to (nearly) zero.
DirectionalSplit remove_directional_outliers(const Points3& normals,
                                             double cosine_threshold);

Points3 select_columns(const Points3& m, const std::vector<Eigen::Index>& columns);

}  // namespace kentreg
