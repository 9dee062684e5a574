#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "kentreg/errors.hpp"

namespace kentreg {

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3T = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;
// Columns are points (or unit directions); the natural layout for GEMMs.
using Points3 = Eigen::Matrix<double, 3, Eigen::Dynamic>;

// Rigid motion p -> R p + t. The rotation is kept as an explicit 3x3 matrix.
template <typename Scalar>
struct RigidTransformT {
  Mat3T<Scalar> rotation = Mat3T<Scalar>::Identity();
  Vec3T<Scalar> translation = Vec3T<Scalar>::Zero();

  static RigidTransformT identity() { return {}; }

  RigidTransformT inverse() const {
    RigidTransformT inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }
};
using RigidTransform = RigidTransformT<double>;

// Ordered list of 3D points with optional per-point unit normals.
struct PointCloud {
  Points3 points;
  Points3 normals;  // empty (0 columns) when absent

  PointCloud() = default;
  explicit PointCloud(Points3 pts) : points(std::move(pts)) {}
  PointCloud(Points3 pts, Points3 nrm)
      : points(std::move(pts)), normals(std::move(nrm)) {}

  Eigen::Index size() const { return points.cols(); }
  bool empty() const { return points.cols() == 0; }
  bool has_normals() const { return normals.cols() > 0; }

  // Throws TooFewPoints on an empty cloud and Error on a normals mismatch.
  void validate() const;
};

template <typename Scalar>
Vec3T<Scalar> apply_transform(const RigidTransformT<Scalar>& transform,
                              const Vec3T<Scalar>& p) {
  return transform.rotation * p + transform.translation;
}

Points3 apply_transform(const RigidTransform& transform, const Points3& points);
PointCloud apply_transform(const RigidTransform& transform,
                           const PointCloud& cloud);

// R v renormalized to unit length.
template <typename Scalar>
Vec3T<Scalar> rotate_unit(const Mat3T<Scalar>& rotation,
                          const Vec3T<Scalar>& v) {
  return (rotation * v).normalized();
}

// Geodesic angle between two rotations, in [0, pi].
template <typename Scalar>
Scalar rotation_error(const Mat3T<Scalar>& truth, const Mat3T<Scalar>& estimate) {
  using std::acos;
  const Scalar c = ((truth.transpose() * estimate).trace() - Scalar(1)) / Scalar(2);
  return acos(std::clamp(c, Scalar(-1), Scalar(1)));
}

template <typename Scalar>
Scalar translation_error(const Vec3T<Scalar>& truth, const Vec3T<Scalar>& estimate) {
  return (estimate - truth).norm();
}

template <typename Scalar>
Mat3T<Scalar> axis_angle(const Vec3T<Scalar>& axis, Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, axis.normalized()).toRotationMatrix();
}

template <typename Scalar>
Mat3T<Scalar> skew(const Mat3T<Scalar>& m) {
  return Scalar(0.5) * (m - m.transpose());
}

// Nearest rotation in Frobenius norm (polar factor with det fixed to +1).
Mat3 project_to_rotation(const Mat3& m);

// Orthogonality and determinant checks.
bool is_rotation(const Mat3& r, double tol = 1e-9);

// Chordal mean of rotations projected back to SO(3):
//   R = Rbar U diag(1/sqrt(l1), 1/sqrt(l2), s/sqrt(l3)) U^T,
// where U diag(l) U^T = Rbar^T Rbar (eigenvalues sorted descending) and
// s = sign(det Rbar). Throws DegenerateMean when any l <= 1e-12.
Mat3 average_rotations(std::span<const Mat3> rotations);

// Arithmetic mean of the columns.
Vec3 centroid(const Points3& points);

// Mean after discarding the `trim_fraction` of points farthest from the plain
// mean. trim_fraction = 0 gives the plain mean.
Vec3 trimmed_centroid(const Points3& points, double trim_fraction);

}  // namespace kentreg
