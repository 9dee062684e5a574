#pragma once

#include <optional>
#include <vector>

#include "kentreg/geometry.hpp"
#include "kentreg/kent.hpp"

namespace kentreg {

// f(R) = beta trace(R^T A R B) - kappa trace(R C) on SO(3).
//
// For the rotation update A = g2 g2^T - g1 g1^T comes from the current Kent
// axes, B the weighted scatter of the observed normals and C = sum tau x y^T.
template <typename Scalar>
struct RotationObjectiveT {
  Scalar kappa{0};
  Scalar beta{0};
  Mat3T<Scalar> a = Mat3T<Scalar>::Zero();
  Mat3T<Scalar> b = Mat3T<Scalar>::Zero();
  Mat3T<Scalar> c = Mat3T<Scalar>::Zero();
};
using RotationObjective = RotationObjectiveT<double>;

template <typename Scalar>
Mat3T<Scalar> axis_matrix(const KentParamsT<Scalar>& params) {
  return params.minor_axis() * params.minor_axis().transpose() -
         params.major_axis() * params.major_axis().transpose();
}

template <typename Scalar>
Scalar objective_value(const RotationObjectiveT<Scalar>& obj, const Mat3T<Scalar>& r) {
  return obj.beta * (r.transpose() * obj.a * r * obj.b).trace() -
         obj.kappa * (r * obj.c).trace();
}

// d f / d R, treating R as an unconstrained 3x3 matrix (A, B symmetric).
template <typename Scalar>
Mat3T<Scalar> euclidean_gradient(const RotationObjectiveT<Scalar>& obj,
                                 const Mat3T<Scalar>& r) {
  return Scalar(2) * obj.beta * obj.a * r * obj.b - obj.kappa * obj.c.transpose();
}

// Projection of the Euclidean gradient onto the tangent space at R.
template <typename Scalar>
Mat3T<Scalar> riemannian_gradient(const RotationObjectiveT<Scalar>& obj,
                                  const Mat3T<Scalar>& r) {
  return r * skew<Scalar>(r.transpose() * euclidean_gradient(obj, r));
}

struct MinimizeOptions {
  double tolerance = 1e-8;  // on the Riemannian gradient Frobenius norm
  int max_iters = 200;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
  // When set, steps never rotate about this unit axis, taken in the frame
  // that R maps into (R -> exp(w) R with w orthogonal to the axis).
  std::optional<Vec3> locked_axis;
};

struct MinimizeResult {
  Mat3 rotation = Mat3::Identity();
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> value_trace;  // objective at every accepted iterate
};

// Riemannian gradient descent with Armijo backtracking and a polar (SVD)
// retraction. Never returns a point worse than R0.
MinimizeResult minimize(const RotationObjective& obj, const Mat3& r0,
                        const MinimizeOptions& options = {});

}  // namespace kentreg
