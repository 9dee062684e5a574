#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "kentreg/errors.hpp"
#include "kentreg/geometry.hpp"

namespace kentreg {

// Five-parameter Kent (FB5) distribution on the unit sphere.
//
//   f(x) = exp{ kappa mu.x + beta [ (g1.x)^2 - (g2.x)^2 ] } / c(kappa, beta)
//
// `frame` holds the orthonormal columns (mu, g1, g2): mean direction, major
// axis and minor axis. Only the large-kappa normalizer
// c = 2 pi e^kappa / sqrt(kappa^2 - 4 beta^2) is provided, so every density
// evaluation requires 0 <= 2 beta < kappa.
template <typename Scalar>
struct KentParamsT {
  Scalar kappa{1};
  Scalar beta{0};
  Mat3T<Scalar> frame = Mat3T<Scalar>::Identity();

  auto mu() const { return frame.col(0); }
  auto major_axis() const { return frame.col(1); }
  auto minor_axis() const { return frame.col(2); }
};
using KentParams = KentParamsT<double>;

inline constexpr double kMaxKappa = 1e4;
inline constexpr double kBetaClampRatio = 0.499;

template <typename Scalar>
Scalar log_normalizer(Scalar kappa, Scalar beta) {
  using std::log;
  if (!(kappa > Scalar(0)) || !(beta >= Scalar(0)) || !(Scalar(2) * beta < kappa))
    throw InvalidParams("Kent normalizer requires kappa > 0 and 0 <= 2*beta < kappa");
  return log(Scalar(2) * std::numbers::pi_v<Scalar>) + kappa -
         Scalar(0.5) * log(kappa * kappa - Scalar(4) * beta * beta);
}

// Throws InvalidParams unless the parameters satisfy the density's domain
// and the frame is orthonormal within `tol`.
void validate(const KentParams& params, double tol = 1e-9);

template <typename Scalar>
Scalar log_pdf(const KentParamsT<Scalar>& params, const Vec3T<Scalar>& x) {
  const Scalar a = params.major_axis().dot(x);
  const Scalar b = params.minor_axis().dot(x);
  return params.kappa * params.mu().dot(x) + params.beta * (a * a - b * b) -
         log_normalizer(params.kappa, params.beta);
}

// Lemma: if x ~ FB5(kappa, beta, G) then R x ~ FB5(kappa, beta, R G).
template <typename Scalar>
KentParamsT<Scalar> rotate_params(const Mat3T<Scalar>& rotation,
                                  const KentParamsT<Scalar>& params) {
  KentParamsT<Scalar> out = params;
  out.frame = rotation * params.frame;
  return out;
}

// Right-handed frame whose first column is `mu`: the minimal (Rodrigues)
// rotation carrying e1 onto mu. Falls back to diag(-1, -1, 1) when mu is
// antipodal to e1.
Mat3 frame_from_mean(const Vec3& mu);

// Kent parameters with beta = 0 (a von Mises-Fisher) about `mu`.
KentParams vmf_params(const Vec3& mu, double kappa);

// Draws n unit vectors by rejection. The envelope is the rotationally
// symmetric density exp{kappa t + beta (1 - t^2)}, t = mu.x, whose polar
// marginal is drawn by rejection from an exponential tilt with rate
// kappa - 2 beta. Acceptance stays high even for sizeable beta.
Points3 sample(const KentParams& params, Eigen::Index n, std::mt19937_64& rng);
Points3 sample(const KentParams& params, Eigen::Index n, std::uint64_t seed);

// Uniform directions on the sphere.
Points3 sample_uniform_sphere(Eigen::Index n, std::mt19937_64& rng);

// Weighted moment estimator. Weights need not be normalized; they are divided
// by their sum. An estimate above kMaxKappa is saturated to a von Mises-Fisher
// (kappa = kMaxKappa, beta = 0): such a spread is nearly one-dimensional and
// the moment estimate of beta runs to kappa / 2 with it. Otherwise beta is
// clamped to kBetaClampRatio * kappa if the estimate would break 2 beta < kappa.
//
// Throws DegenerateSamples when the total weight is <= 1e-9, fewer than three
// samples are given, the weighted mean vanishes, or 2 - 2 Rbar - r2 <= 0.
KentParams moment_fit(const Points3& samples, const Eigen::VectorXd& weights);
KentParams moment_fit(const Points3& samples);

}  // namespace kentreg
