#include "kentreg/kent.hpp"

#include <Eigen/Eigenvalues>

namespace kentreg {

void validate(const KentParams& params, double tol) {
  if (!(params.kappa > 0.0) || !(params.beta >= 0.0) ||
      !(2.0 * params.beta < params.kappa))
    throw InvalidParams("Kent parameters require kappa > 0 and 0 <= 2*beta < kappa");
  if ((params.frame.transpose() * params.frame - Mat3::Identity()).norm() > tol)
    throw InvalidParams("Kent frame is not orthonormal");
}

Mat3 frame_from_mean(const Vec3& mu) {
  const Vec3 m = mu.normalized();
  const Vec3 e1 = Vec3::UnitX();
  const double c = e1.dot(m);
  if (c < -1.0 + 1e-12) return Vec3(-1.0, -1.0, 1.0).asDiagonal();

  const Vec3 v = e1.cross(m);
  Mat3 vx;
  vx << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return Mat3::Identity() + vx + vx * vx / (1.0 + c);
}

KentParams vmf_params(const Vec3& mu, double kappa) {
  KentParams p;
  p.kappa = kappa;
  p.beta = 0.0;
  p.frame = frame_from_mean(mu);
  return p;
}

Points3 sample(const KentParams& params, Eigen::Index n, std::mt19937_64& rng) {
  validate(params);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double kappa = params.kappa;
  const double beta = params.beta;
  const double rate = kappa - 2.0 * beta;
  const double tail = std::exp(-2.0 * rate);

  Points3 out(3, n);
  for (Eigen::Index i = 0; i < n;) {
    // Polar marginal: density exp(kappa t - beta t^2) on [-1, 1], bounded by
    // its tangent line at t = 1.
    const double u = 1.0 - unif(rng);
    const double t = std::clamp(1.0 + std::log(u + (1.0 - u) * tail) / rate, -1.0, 1.0);
    if (unif(rng) > std::exp(-beta * (t - 1.0) * (t - 1.0))) continue;

    const double phi = 2.0 * std::numbers::pi * unif(rng);
    const double s2 = std::max(0.0, 1.0 - t * t);
    const double sp = std::sin(phi);
    if (unif(rng) > std::exp(-2.0 * beta * s2 * sp * sp)) continue;

    const double s = std::sqrt(s2);
    out.col(i) = (t * params.mu() + s * (std::cos(phi) * params.major_axis() +
                                         sp * params.minor_axis()))
                     .normalized();
    ++i;
  }
  return out;
}

Points3 sample(const KentParams& params, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample(params, n, rng);
}

Points3 sample_uniform_sphere(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Points3 out(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec3 v;
    do {
      v = Vec3(gauss(rng), gauss(rng), gauss(rng));
    } while (v.norm() < 1e-12);
    out.col(i) = v.normalized();
  }
  return out;
}

KentParams moment_fit(const Points3& samples, const Eigen::VectorXd& weights) {
  using Reason = DegenerateSamples::Reason;
  if (samples.cols() < 3)
    throw DegenerateSamples(Reason::LowWeight, "moment fit needs at least 3 samples");
  if (weights.size() != samples.cols())
    throw Error("moment fit: weights and samples differ in length");
  const double total = weights.sum();
  if (!(total > 1e-9))
    throw DegenerateSamples(Reason::LowWeight, "moment fit: total weight too small");

  const Vec3 mean = samples * weights / total;
  const Mat3 scatter = samples * weights.asDiagonal() * samples.transpose() / total;

  const double r1 = mean.norm();
  if (r1 < 1e-12)
    throw DegenerateSamples(Reason::NoMeanDirection, "moment fit: mean direction vanishes");

  const Mat3 h = frame_from_mean(mean / r1);
  const Mat3 b = h.transpose() * scatter * h;

  // Diagonalize the tangent-plane block of the rotated scatter.
  const double b11 = b(1, 1), b22 = b(2, 2), b12 = b(1, 2);
  const double psi = 0.5 * std::atan2(2.0 * b12, b11 - b22);
  const double r2 = 2.0 * std::sqrt(0.25 * (b11 - b22) * (b11 - b22) + b12 * b12);

  KentParams fit;
  const double c = std::cos(psi), s = std::sin(psi);
  fit.frame.col(0) = h.col(0);
  fit.frame.col(1) = c * h.col(1) + s * h.col(2);
  fit.frame.col(2) = -s * h.col(1) + c * h.col(2);

  const double d1 = 2.0 - 2.0 * r1 - r2;
  const double d2 = 2.0 - 2.0 * r1 + r2;
  if (!(d1 > 0.0))
    throw DegenerateSamples(Reason::ConcentrationOverflow,
                            "moment fit: concentration overflow (2 - 2R - r2 <= 0)");
  fit.kappa = 1.0 / d1 + 1.0 / d2;
  fit.beta = 0.5 * (1.0 / d1 - 1.0 / d2);

  if (fit.kappa > kMaxKappa) {
    fit.kappa = kMaxKappa;
    fit.beta = 0.0;
  }
  if (2.0 * fit.beta >= fit.kappa) fit.beta = kBetaClampRatio * fit.kappa;
  return fit;
}

KentParams moment_fit(const Points3& samples) {
  return moment_fit(samples, Eigen::VectorXd::Ones(samples.cols()));
}

}  // namespace kentreg
