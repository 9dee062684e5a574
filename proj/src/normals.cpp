#include "kentreg/normals.hpp"

#include <Eigen/Eigenvalues>

#include "kentreg/kdtree.hpp"

namespace kentreg {

PointCloud estimate_normals(const PointCloud& cloud, const NormalEstimationConfig& cfg) {
  if (cfg.k_neighbors < 3) throw Error("normal estimation needs k_neighbors >= 3");
  if (cloud.size() < cfg.k_neighbors + 1)
    throw TooFewPoints("normal estimation needs more points than k_neighbors");

  const KdTree tree(cloud.points);
  std::vector<Eigen::Index> kept;
  std::vector<Vec3> normals;
  kept.reserve(static_cast<std::size_t>(cloud.size()));
  normals.reserve(static_cast<std::size_t>(cloud.size()));

  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Vec3 p = cloud.points.col(i);
    const auto neighbors = tree.knn(p, cfg.k_neighbors);

    Vec3 mean = Vec3::Zero();
    for (const auto& nb : neighbors) mean += cloud.points.col(nb.index);
    mean /= static_cast<double>(neighbors.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& nb : neighbors) {
      const Vec3 d = cloud.points.col(nb.index) - mean;
      cov += d * d.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3& lambda = eig.eigenvalues();
    if (!(lambda(2) > 0.0) || lambda(1) <= 1e-10 * lambda(2)) continue;

    Vec3 n = eig.eigenvectors().col(0).normalized();
    if (n.dot(cfg.viewpoint - p) < 0.0) n = -n;
    kept.push_back(i);
    normals.push_back(n);
  }

  PointCloud out;
  out.points.resize(3, static_cast<Eigen::Index>(kept.size()));
  out.normals.resize(3, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    out.points.col(static_cast<Eigen::Index>(j)) = cloud.points.col(kept[j]);
    out.normals.col(static_cast<Eigen::Index>(j)) = normals[j];
  }
  return out;
}

DirectionalSplit remove_directional_outliers(const Points3& normals,
                                             double cosine_threshold) {
  if (normals.cols() == 0) throw TooFewPoints("no normals to filter");
  const Vec3 sum = normals.rowwise().sum();
  if (sum.norm() < 1e-9) throw DegenerateMean("normals have no mean direction");
  const Vec3 mean = sum.normalized();

  DirectionalSplit split;
  for (Eigen::Index i = 0; i < normals.cols(); ++i) {
    if (normals.col(i).dot(mean) >= cosine_threshold)
      split.kept.push_back(i);
    else
      split.removed.push_back(i);
  }
  return split;
}

Points3 select_columns(const Points3& m, const std::vector<Eigen::Index>& columns) {
  Points3 out(3, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = m.col(columns[j]);
  return out;
}

}  // namespace kentreg
