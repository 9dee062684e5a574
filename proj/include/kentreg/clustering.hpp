#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kentreg/geometry.hpp"

namespace kentreg {

struct SphericalClustering {
  Points3 centroids;             // unit columns, sorted lexicographically
  std::vector<int> assignments;  // one per input normal, in [0, k)
  std::vector<double> objective_trace;  // sum of n . c_a(n) after each iteration
  int iterations = 0;

  int k() const { return static_cast<int>(centroids.cols()); }
  std::vector<Eigen::Index> members(int cluster) const;
};

// Spherical k-means (cosine similarity, centroids are normalized member
// sums) with k-means++ seeding on the distance 1 - cos. Deterministic given
// `seed`. Empty clusters are reseeded from the member with the worst
// similarity to its own centroid. Throws TooFewPoints when there are fewer
// normals than k.
SphericalClustering spherical_kmeans(const Points3& normals, int k, std::uint64_t seed,
                                     int max_iters = 100);

// Assigns every normal to its most similar centroid, without moving them.
SphericalClustering assign_to_centroids(const Points3& normals, const Points3& centroids);

// Greedy maximum-cosine pairing of centroids. Each cluster is used at most
// once and pairs whose centroid cosine is below `min_cosine` are dropped.
// Returned pairs are (model cluster, observed cluster), ordered by model index.
std::vector<std::pair<int, int>> match_clusters(const SphericalClustering& model,
                                                const SphericalClustering& observed,
                                                double min_cosine = 0.5);

}  // namespace kentreg
