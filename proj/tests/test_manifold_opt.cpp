#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <numbers>

#include "kentreg/manifold_opt.hpp"
#include "test_support.hpp"

using namespace kentreg;
using kentreg::testing::kabsch_oracle;
using kentreg::testing::random_rotation;
using kentreg::testing::random_unit;
using kentreg::testing::rot_z;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Objective built from pairs y_i ~ R* x_i; C = sum x y^T, B = sum x x^T.
RotationObjective pair_objective(const Points3& x, const Points3& y, double kappa, double beta,
                                 const Mat3& frame) {
  RotationObjective obj;
  obj.kappa = kappa;
  obj.beta = beta;
  obj.a = frame.col(2) * frame.col(2).transpose() - frame.col(1) * frame.col(1).transpose();
  obj.b = x * x.transpose();
  obj.c = x * y.transpose();
  return obj;
}

Mat3 exp_so3(const Vec3& w) {
  const double a = w.norm();
  if (a < 1e-300) return Mat3::Identity();
  return Eigen::AngleAxisd(a, w / a).toRotationMatrix();
}

}  // namespace

TEST(ObjectiveValue, LinearTermOnly) {
  RotationObjective obj;
  obj.kappa = 2.5;
  obj.c = Mat3::Identity();
  EXPECT_DOUBLE_EQ(objective_value<double>(obj, Mat3::Identity()), -7.5);
}

TEST(ObjectiveValue, QuadraticTermOnly) {
  std::mt19937_64 rng(1);
  RotationObjective obj;
  obj.beta = 0.7;
  const Mat3 f = random_rotation(rng);
  obj.a = axis_matrix(KentParams{1.0, 0.0, f});
  const Mat3 m = Mat3::Random();
  obj.b = m * m.transpose();
  EXPECT_NEAR(objective_value<double>(obj, Mat3::Identity()), 0.7 * (obj.a * obj.b).trace(), 1e-14);
}

TEST(ObjectiveValue, SingleCorrespondence) {
  RotationObjective obj;
  obj.kappa = 3.0;
  obj.c = Vec3::UnitX() * Vec3::UnitY().transpose();
  // trace(R e1 e2^T) = e2^T R e1 = R(1, 0).
  EXPECT_NEAR(objective_value(obj, rot_z(std::numbers::pi / 2)), -3.0, 1e-15);
  EXPECT_NEAR(objective_value<double>(obj, Mat3::Identity()), 0.0, 1e-15);
}

TEST(AxisMatrix, TracelessWithUnitEigenvalues) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const Mat3 a = axis_matrix(KentParams{5.0, 1.0, random_rotation(rng)});
    EXPECT_LT((a - a.transpose()).norm(), 1e-15);
    EXPECT_NEAR(a.trace(), 0.0, 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(a);
    EXPECT_NEAR(eig.eigenvalues()(0), -1.0, 1e-9);
    EXPECT_NEAR(eig.eigenvalues()(1), 0.0, 1e-9);
    EXPECT_NEAR(eig.eigenvalues()(2), 1.0, 1e-9);
  }
}

TEST(EuclideanGradient, LinearCaseIsConstant) {
  std::mt19937_64 rng(3);
  RotationObjective obj;
  obj.kappa = 4.0;
  obj.c = Mat3::Random();
  const Mat3 g = euclidean_gradient(obj, random_rotation(rng));
  EXPECT_LT((g + 4.0 * obj.c.transpose()).norm(), 1e-14);
  EXPECT_LT((g - euclidean_gradient(obj, random_rotation(rng))).norm(), 1e-14);
}

TEST(EuclideanGradient, QuadraticCaseByHand) {
  RotationObjective obj;
  obj.beta = 1.5;
  obj.a = Vec3(1, -1, 0).asDiagonal();
  obj.b = Mat3::Identity();
  EXPECT_LT((euclidean_gradient<double>(obj, Mat3::Identity()) - Mat3(Vec3(3, -3, 0).asDiagonal())).norm(),
            1e-15);
}

TEST(EuclideanGradient, CentralDifferences) {
  std::mt19937_64 rng(4);
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    RotationObjective obj;
    obj.kappa = 1.0 + 10.0 * std::abs(random_unit(rng).x());
    obj.beta = 0.4 * obj.kappa * std::abs(random_unit(rng).y());
    obj.a = axis_matrix(KentParams{obj.kappa, obj.beta, random_rotation(rng)});
    const Mat3 m = Mat3::Random();
    obj.b = m * m.transpose();
    obj.c = Mat3::Random();
    const Mat3 r = random_rotation(rng);
    const Mat3 g = euclidean_gradient(obj, r);
    // Every matrix entry, and a random tangent direction.
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        Mat3 e = Mat3::Zero();
        e(i, j) = 1.0;
        const double fd =
            (objective_value<double>(obj, r + h * e) - objective_value<double>(obj, r - h * e)) /
            (2 * h);
        EXPECT_LE(std::abs(fd - g(i, j)), 1e-4 * std::max(1.0, std::abs(g(i, j))));
      }
    }
    const Mat3 dot = r * skew<double>(Mat3::Random());
    const double fd =
        (objective_value<double>(obj, r + h * dot) - objective_value<double>(obj, r - h * dot)) /
        (2 * h);
    const double analytic = (g.array() * dot.array()).sum();
    EXPECT_LE(std::abs(fd - analytic), 1e-5 * std::max(1.0, std::abs(analytic)));
  }
}

TEST(RiemannianGradient, IsTangent) {
  std::mt19937_64 rng(5);
  RotationObjective obj;
  obj.kappa = 3;
  obj.beta = 1;
  obj.a = axis_matrix(KentParams{3.0, 1.0, random_rotation(rng)});
  obj.b = Mat3::Identity();
  obj.c = Mat3::Random();
  const Mat3 r = random_rotation(rng);
  const Mat3 xi = r.transpose() * riemannian_gradient(obj, r);
  EXPECT_LT((xi + xi.transpose()).norm(), 1e-12);
}

TEST(Minimize, ProcrustesMatchesKabsch) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const Mat3 truth = random_rotation(rng);
    Points3 x(3, 50);
    for (int i = 0; i < 50; ++i) x.col(i) = random_unit(rng);
    Points3 y = truth * x;
    for (int i = 0; i < 50; ++i) y.col(i) = (y.col(i) + 0.05 * Vec3(g(rng), g(rng), g(rng))).normalized();
    // min -kappa tr(R C) with C = x y^T aligns R x to y.
    const RotationObjective obj = pair_objective(x, y, 10.0, 0.0, Mat3::Identity());
    const MinimizeResult res = minimize(obj, Mat3::Identity());
    EXPECT_LT(rotation_error<double>(kabsch_oracle(x, y), res.rotation), 1e-3)
        << "trial " << trial;
  }
}

TEST(Minimize, ExactPairsRecoverRotation) {
  std::mt19937_64 rng(7);
  const Mat3 truth = axis_angle<double>(random_unit(rng), 1.0);
  Points3 x(3, 50);
  for (int i = 0; i < 50; ++i) x.col(i) = random_unit(rng);
  // tr(R x y^T) = sum y^T R x, maximized when R x = y, so y = R* x.
  const RotationObjective obj = pair_objective(x, truth * x, 1.0, 0.0, Mat3::Identity());
  const MinimizeResult res = minimize(obj, Mat3::Identity());
  EXPECT_LT(rotation_error<double>(truth, res.rotation), 1e-4);
  EXPECT_TRUE(res.converged);
}

TEST(Minimize, MatchesGridSearch) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 3; ++trial) {
    const Mat3 truth = random_rotation(rng);
    Points3 x(3, 10);
    for (int i = 0; i < 10; ++i) x.col(i) = random_unit(rng);
    Points3 y = truth * x;
    for (int i = 0; i < 10; ++i) y.col(i) = (y.col(i) + 0.2 * Vec3(g(rng), g(rng), g(rng))).normalized();
    const RotationObjective obj = pair_objective(x, y, 1.0, 0.2, random_rotation(rng));

    // Rotation-vector grid over the ball of radius pi, 2 degree spacing.
    const double step = 2 * kDeg;
    const int n = static_cast<int>(std::ceil(std::numbers::pi / step));
    double best = std::numeric_limits<double>::infinity();
    Mat3 best_r = Mat3::Identity();
    for (int i = -n; i <= n; ++i) {
      for (int j = -n; j <= n; ++j) {
        for (int k = -n; k <= n; ++k) {
          const Vec3 w(i * step, j * step, k * step);
          if (w.norm() > std::numbers::pi) continue;
          const Mat3 r = exp_so3(w);
          const double v = objective_value(obj, r);
          if (v < best) {
            best = v;
            best_r = r;
          }
        }
      }
    }
    const MinimizeResult res = minimize(obj, Mat3::Identity());
    EXPECT_LT(rotation_error<double>(best_r, res.rotation), 2 * kDeg) << "trial " << trial;
    EXPECT_LE(res.value, best + 1e-12);
  }
}

TEST(Minimize, FixedPointStaysPut) {
  std::mt19937_64 rng(9);
  const Mat3 truth = random_rotation(rng);
  Points3 x(3, 20);
  for (int i = 0; i < 20; ++i) x.col(i) = random_unit(rng);
  const RotationObjective obj = pair_objective(x, truth * x, 2.0, 0.0, Mat3::Identity());
  const MinimizeResult first = minimize(obj, Mat3::Identity());
  const MinimizeResult again = minimize(obj, first.rotation);
  EXPECT_LT(rotation_error<double>(first.rotation, again.rotation), 1e-9);
  EXPECT_LE(again.value, first.value + 1e-12);
  EXPECT_LE(again.gradient_norm, 1e-8);
}

TEST(Minimize, IteratesAreRotationsAndMonotone) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    Points3 x(3, 15), y(3, 15);
    for (int i = 0; i < 15; ++i) {
      x.col(i) = random_unit(rng);
      y.col(i) = random_unit(rng);
    }
    const RotationObjective obj = pair_objective(x, y, 3.0, 1.2, random_rotation(rng));
    const Mat3 r0 = random_rotation(rng);
    const MinimizeResult res = minimize(obj, r0);
    EXPECT_TRUE(is_rotation(res.rotation, 1e-9));
    EXPECT_LE(res.value, objective_value(obj, r0));
    for (std::size_t i = 1; i < res.value_trace.size(); ++i)
      EXPECT_LE(res.value_trace[i], res.value_trace[i - 1]);
  }
}

TEST(Minimize, LockedAxisLeavesOnlyTwistGradient) {
  std::mt19937_64 rng(11);
  const Vec3 axis = random_unit(rng);
  Points3 x(3, 30);
  for (int i = 0; i < 30; ++i) x.col(i) = random_unit(rng);
  const Mat3 truth = axis_angle<double>(random_unit(rng), 0.5);
  const RotationObjective obj = pair_objective(x, truth * x, 1.0, 0.0, Mat3::Identity());
  MinimizeOptions opts;
  opts.locked_axis = axis;
  opts.max_iters = 2000;
  const Mat3 r0 = random_rotation(rng);
  const MinimizeResult res = minimize(obj, r0, opts);
  EXPECT_LT(res.gradient_norm, 1e-6);
  EXPECT_LT(res.value, objective_value(obj, r0));

  // Left-form gradient w with grad = hat(w) R: only its axis component survives.
  const Mat3 omega = riemannian_gradient(obj, res.rotation) * res.rotation.transpose();
  const Vec3 w(omega(2, 1), omega(0, 2), omega(1, 0));
  EXPECT_LT((w - w.dot(axis) * axis).norm(), 1e-6);
  EXPECT_GT(std::abs(w.dot(axis)), 1e-3);
}

TEST(Minimize, LockedStepIsOrthogonalToAxis) {
  std::mt19937_64 rng(12);
  const Vec3 axis = random_unit(rng);
  Points3 x(3, 30);
  for (int i = 0; i < 30; ++i) x.col(i) = random_unit(rng);
  const RotationObjective obj =
      pair_objective(x, axis_angle<double>(random_unit(rng), 0.5) * x, 1.0, 0.0, Mat3::Identity());
  MinimizeOptions opts;
  opts.locked_axis = axis;
  opts.max_iters = 1;
  const Mat3 r0 = random_rotation(rng);
  const MinimizeResult res = minimize(obj, r0, opts);
  const Eigen::AngleAxisd step(res.rotation * r0.transpose());
  ASSERT_GT(step.angle(), 1e-6);
  EXPECT_LT(std::abs(step.axis().dot(axis)), 1e-9);
}
