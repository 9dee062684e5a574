#pragma once

#include <Eigen/Geometry>

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "kentreg/geometry.hpp"

namespace kentreg {

// Square patch of side `extent` on the plane n . x = offset, centred at
// offset * n.
struct PlaneSpec {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  double extent = 1.0;
  Eigen::Index point_count = 0;
};

struct SceneSpec {
  std::vector<PlaneSpec> planes;
  double noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  // Defaults to the clean scene's bounding box scaled by 1.5 about its centre.
  std::optional<Eigen::AlignedBox3d> outlier_box;
  std::uint64_t seed = 0;

  // Throws InvalidParams unless there are >= 2 planes with non-parallel
  // normals and 0 <= outlier_fraction < 1.
  void validate() const;
  Eigen::Index total_points() const;
};

struct SceneSample {
  PointCloud cloud;
  std::vector<bool> outlier;     // ground-truth labels, one per point
  std::vector<int> plane_index;  // source plane per point, -1 for outliers
};

// Uniform samples on every patch, isotropic Gaussian noise, then
// floor(outlier_fraction * N) points replaced by uniform samples in the
// outlier box. Deterministic given spec.seed.
SceneSample generate_scene(const SceneSpec& spec);

struct ScenePair {
  SceneSample model;
  SceneSample observed;  // expressed in the observed frame
  RigidTransform truth;  // observed = truth(model) before corruption
};

// The observed cloud is truth applied to the same clean surface samples, with
// noise and outliers redrawn from a different sub-seed.
ScenePair make_pair(const SceneSpec& spec, const RigidTransform& truth);

// Rotation about a uniformly random axis by an angle uniform in
// [0, max_angle], translation with uniform direction and length uniform in
// [0, max_translation].
RigidTransform random_transform(std::mt19937_64& rng, double max_angle,
                                double max_translation);

// Wall (x = 2) and floor (z = -1), each 3 m square, half the points each.
// Normals point towards the origin once oriented from there.
SceneSpec two_plane_scene(Eigen::Index points, std::uint64_t seed);

}  // namespace kentreg
