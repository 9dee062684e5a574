#pragma once

#include <cstdint>
#include <vector>

#include "kentreg/clustering.hpp"
#include "kentreg/geometry.hpp"
#include "kentreg/kent.hpp"
#include "kentreg/manifold_opt.hpp"
#include "kentreg/normals.hpp"

namespace kentreg {

// Mixture weights for one group: M Kent components centred on the model
// normals, each with weight (1 - pi0) / M, plus a uniform outlier term pi0 p0
// with p0 = 1 / N.
struct MixtureConfig {
  double pi_outlier = 0.1;
  double component_weight = 0.9;
  double outlier_density = 1.0;

  static MixtureConfig make(double pi_outlier, Eigen::Index model_count,
                            Eigen::Index observed_count);
};

// Soft assignments. tau(m, n) = P(z_n = y_m | x_n); tau_outlier(n) takes the
// remaining mass. log_tau keeps the same values in log space so that weights
// far below the double range still carry relative information.
struct PosteriorMatrix {
  Eigen::MatrixXd tau;
  Eigen::VectorXd tau_outlier;
  Eigen::MatrixXd log_tau;
  Eigen::VectorXd log_marginal;     // log p(x_n)
  Eigen::VectorXd log_inlier_mass;  // log sum_m tau(m, n)

  Eigen::Index components() const { return tau.rows(); }
  Eigen::Index observations() const { return tau.cols(); }
};

// Per-observation inlier mass T_n = sum_m tau(m, n).
Eigen::VectorXd inlier_weights(const PosteriorMatrix& posteriors);

// log FB5(R x_n | mean y_m) for every pair, using the shared concentration,
// ovalness and axes of `kent`. Result is M x N.
Eigen::MatrixXd component_log_density(const Points3& model_normals,
                                      const Points3& observed_normals,
                                      const KentParams& kent, const Mat3& rotation);

// Posterior responsibilities, normalized per observation with log-sum-exp.
// `rotation` maps observed normals onto model normals.
PosteriorMatrix e_step(const Points3& model_normals, const Points3& observed_normals,
                       const KentParams& kent, const Mat3& rotation,
                       const MixtureConfig& mix);

// Expected complete-data log-likelihood
//   Q = sum_n sum_m tau_mn (log pi0 + log p0 + log pi_m + log FB5(x_n | y_m)).
// With pi0 = 0 there is no outlier component and its two terms are omitted.
double q_function(const PosteriorMatrix& posteriors, const Points3& model_normals,
                  const Points3& observed_normals, const KentParams& kent,
                  const Mat3& rotation, const MixtureConfig& mix);

// Same value computed from the cached log posteriors and marginals of an
// e_step, without re-evaluating the densities.
double q_function(const PosteriorMatrix& posteriors, const MixtureConfig& mix);

struct MStepResult {
  Mat3 rotation = Mat3::Identity();
  KentParams kent;
  MinimizeResult solver;
};

// Rotation update followed by the weighted moment fit on the rotated observed
// normals. B is the weighted scatter of the observed normals about their
// weighted mean. Weights are divided by N_p (which leaves the argmin
// unchanged) and formed from log_tau, so the update stays defined when every
// tau underflows. A concentration overflow in the fit saturates at kMaxKappa
// with beta = 0.
MStepResult m_step(const PosteriorMatrix& posteriors, const Points3& model_normals,
                   const Points3& observed_normals, const KentParams& kent_prev,
                   const Mat3& rotation_prev, const MinimizeOptions& solver = {});

struct ClusterEmOptions {
  double rel_tol = 1e-6;
  int max_iters = 100;
  Mat3 initial_rotation = Mat3::Identity();
  // Ablation switch: hold beta at zero (von Mises-Fisher components).
  bool zero_beta = false;
  MinimizeOptions solver;
};

struct ClusterEmResult {
  Mat3 rotation = Mat3::Identity();
  KentParams kent;
  std::vector<double> q_trace;  // Q after each completed iteration
  int iterations = 0;
  bool converged = false;
};

// EM on one group of normals. The Kent parameters start from a moment fit of
// the (initially rotated) observed normals with uniform weights. Stops when
// |dQ| / |Q| < rel_tol or after max_iters. Throws TooFewPoints when either
// side has fewer than 5 normals.
ClusterEmResult register_cluster(const Points3& model_normals,
                                 const Points3& observed_normals, double pi_outlier,
                                 const ClusterEmOptions& options = {});

enum class ClusterMode {
  Independent,      // cluster each cloud, then pair centroids
  SharedCentroids,  // cluster the model, assign observed normals to its centroids
};

struct RegistrationConfig {
  NormalEstimationConfig normals;
  int clusters = 4;
  ClusterMode cluster_mode = ClusterMode::Independent;
  double match_min_cosine = 0.5;
  int kmeans_max_iters = 100;
  double pi_outlier = 0.1;
  ClusterEmOptions em;
  int max_normals_per_cluster = 2000;
  int min_cluster_normals = 5;
  // Rounds of (per-cluster EM from the consensus rotation, then averaging).
  int consensus_rounds = 30;
  double consensus_tol = 1e-5;  // radians between successive consensus rotations
  double stall_ratio = 0.8;     // also stop after two steps above this ratio of the previous one
  double translation_trim = 0.0;
  std::uint64_t seed = 0;
  bool parallel = true;
};

struct ClusterReport {
  int model_cluster = -1;
  int observed_cluster = -1;
  Eigen::Index model_normals = 0;
  Eigen::Index observed_normals = 0;
  Mat3 rotation = Mat3::Identity();  // model -> observed, final round
  KentParams kent;
  std::vector<std::vector<double>> q_traces;  // one trace per consensus round
  int iterations = 0;                         // EM iterations, final round
};

struct RegistrationResult {
  // Maps model coordinates into the observed frame: observed ~ R model + t.
  RigidTransform transform;
  std::vector<Mat3> per_cluster_rotations;  // same convention as `transform`
  // Final-round Q summed over clusters, per EM iteration.
  std::vector<double> q_trace;
  std::vector<ClusterReport> clusters;
  bool converged = false;
  int iterations = 0;  // consensus rounds
  bool averaging_fallback = false;
  Eigen::Index model_normals = 0;
  Eigen::Index observed_normals = 0;
};

// Full pipeline: normals, directional outlier removal, spherical clustering
// and pairing, per-cluster EM, rotation averaging, then
// t = mean(observed) - R mean(model) over all input points.
//
// The EM works with the rotation that carries observed normals onto model
// normals; the reported transform is its inverse so that for
// observed = T(model) the result is T.
RegistrationResult register_clouds(const PointCloud& model, const PointCloud& observed,
                                   const RegistrationConfig& config = {});

// t = mean(observed) - R mean(model), optionally with trimmed means.
Vec3 solve_translation(const Points3& model, const Points3& observed, const Mat3& rotation,
                       double trim_fraction = 0.0);

}  // namespace kentreg
