#include "kentreg/icp.hpp"

#include <Eigen/SVD>

#include <limits>

#include "kentreg/kdtree.hpp"

namespace kentreg {

RigidTransform fit_rigid(const Points3& src, const Points3& dst) {
  if (src.cols() == 0 || src.cols() != dst.cols())
    throw TooFewPoints("rigid fit needs equally sized, non-empty point sets");
  const Vec3 src_mean = src.rowwise().mean();
  const Vec3 dst_mean = dst.rowwise().mean();
  const Mat3 cov = (dst.colwise() - dst_mean) * (src.colwise() - src_mean).transpose();

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1;

  RigidTransform t;
  t.rotation = svd.matrixU() * d * svd.matrixV().transpose();
  t.translation = dst_mean - t.rotation * src_mean;
  return t;
}

IcpResult icp_register(const PointCloud& model, const PointCloud& observed,
                       const IcpConfig& cfg) {
  model.validate();
  observed.validate();
  const KdTree tree(observed.points);
  const Eigen::Index n = model.size();

  IcpResult res;
  Points3 matched(3, n);
  double prev_mse = std::numeric_limits<double>::infinity();
  for (int it = 0; it < std::max(1, cfg.max_iters); ++it) {
    const Points3 moved = apply_transform(res.transform, model.points);
    double mse = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto nb = tree.nearest(moved.col(i));
      matched.col(i) = observed.points.col(nb.index);
      mse += nb.squared_distance;
    }
    mse /= static_cast<double>(n);
    res.mse_trace.push_back(mse);
    res.iterations = it + 1;
    if (prev_mse - mse < cfg.convergence_tol && it > 0) {
      res.converged = true;
      break;
    }
    prev_mse = mse;
    res.transform = fit_rigid(model.points, matched);
  }
  return res;
}

}  // namespace kentreg
