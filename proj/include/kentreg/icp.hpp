#pragma once

#include <vector>

#include "kentreg/geometry.hpp"

namespace kentreg {

// Least-squares rigid fit dst ~ R src + t over paired columns (Kabsch / SVD).
RigidTransform fit_rigid(const Points3& src, const Points3& dst);

struct IcpConfig {
  int max_iters = 50;
  double convergence_tol = 1e-10;  // on the change of mean squared error
};

struct IcpResult {
  RigidTransform transform;  // observed ~ R model + t
  std::vector<double> mse_trace;
  int iterations = 0;
  bool converged = false;
};

// Point-to-point ICP with nearest-neighbour correspondences from the moving
// model to the fixed observed cloud. Throws TooFewPoints on an empty cloud.
IcpResult icp_register(const PointCloud& model, const PointCloud& observed,
                       const IcpConfig& cfg = {});

}  // namespace kentreg
