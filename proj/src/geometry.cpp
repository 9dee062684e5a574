#include "kentreg/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <numeric>

namespace kentreg {

void PointCloud::validate() const {
  if (points.cols() == 0) throw TooFewPoints("point cloud is empty");
  if (has_normals() && normals.cols() != points.cols())
    throw Error("normals count does not match points count");
}

Points3 apply_transform(const RigidTransform& transform, const Points3& points) {
  Points3 out = transform.rotation * points;
  out.colwise() += transform.translation;
  return out;
}

PointCloud apply_transform(const RigidTransform& transform,
                           const PointCloud& cloud) {
  PointCloud out(apply_transform(transform, cloud.points));
  if (cloud.has_normals()) {
    out.normals = transform.rotation * cloud.normals;
    out.normals.colwise().normalize();
  }
  return out;
}

Mat3 project_to_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

bool is_rotation(const Mat3& r, double tol) {
  return (r.transpose() * r - Mat3::Identity()).norm() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

Mat3 average_rotations(std::span<const Mat3> rotations) {
  if (rotations.empty()) throw DegenerateMean("no rotations to average");

  Mat3 mean = Mat3::Zero();
  for (const auto& r : rotations) mean += r;
  mean /= static_cast<double>(rotations.size());

  Eigen::SelfAdjointEigenSolver<Mat3> eig(mean.transpose() * mean);
  // Eigen returns ascending order; flip to descending.
  Vec3 lambda = eig.eigenvalues().reverse();
  Mat3 u = eig.eigenvectors().rowwise().reverse();
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(u(i, j)) > 1e-12) {
        if (u(i, j) < 0) u.col(j) = -u.col(j);
        break;
      }
    }
  }
  if ((lambda.array() <= 1e-12).any())
    throw DegenerateMean("mean rotation is rank deficient");

  const double s = mean.determinant() > 0 ? 1.0 : -1.0;
  const Vec3 scale(1.0 / std::sqrt(lambda(0)), 1.0 / std::sqrt(lambda(1)),
                   s / std::sqrt(lambda(2)));
  return mean * u * scale.asDiagonal() * u.transpose();
}

Vec3 centroid(const Points3& points) {
  if (points.cols() == 0) throw TooFewPoints("centroid of an empty set");
  return points.rowwise().mean();
}

Vec3 trimmed_centroid(const Points3& points, double trim_fraction) {
  const Vec3 plain = centroid(points);
  if (trim_fraction <= 0.0) return plain;

  const auto n = static_cast<std::size_t>(points.cols());
  const auto keep = std::max<std::size_t>(
      1, n - static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd dist = (points.colwise() - plain).colwise().squaredNorm();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
  Vec3 sum = Vec3::Zero();
  for (std::size_t i = 0; i < keep; ++i) sum += points.col(order[i]);
  return sum / static_cast<double>(keep);
}

}  // namespace kentreg
