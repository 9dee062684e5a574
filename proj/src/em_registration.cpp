#include "kentreg/em_registration.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <future>
#include <limits>
#include <numeric>
#include <random>

namespace kentreg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v, double extra = kNegInf) {
  const double hi = std::max(v.size() > 0 ? v.maxCoeff() : kNegInf, extra);
  if (hi == kNegInf) return kNegInf;
  double s = (v.array() - hi).exp().sum();
  if (extra != kNegInf) s += std::exp(extra - hi);
  return hi + std::log(s);
}

// Moment fit that saturates instead of failing when the samples are
// concentrated beyond what the estimator can resolve.
KentParams fit_or_saturate(const Points3& samples, const Eigen::VectorXd& weights) {
  try {
    return moment_fit(samples, weights);
  } catch (const DegenerateSamples& e) {
    if (e.reason() != DegenerateSamples::Reason::ConcentrationOverflow) throw;
    const Vec3 mean = samples * weights;
    KentParams sat = vmf_params(mean.normalized(), kMaxKappa);
    return sat;
  }
}

Points3 subsample(const Points3& normals, int cap, std::mt19937_64& rng) {
  if (cap <= 0 || normals.cols() <= cap) return normals;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(normals.cols()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(cap));
  std::sort(idx.begin(), idx.end());
  return select_columns(normals, idx);
}

}  // namespace

MixtureConfig MixtureConfig::make(double pi_outlier, Eigen::Index model_count,
                                  Eigen::Index observed_count) {
  if (!(pi_outlier >= 0.0 && pi_outlier < 1.0))
    throw InvalidParams("outlier weight must lie in [0, 1)");
  if (model_count < 1 || observed_count < 1)
    throw TooFewPoints("mixture needs at least one model and one observed normal");
  MixtureConfig mix;
  mix.pi_outlier = pi_outlier;
  mix.component_weight = (1.0 - pi_outlier) / static_cast<double>(model_count);
  mix.outlier_density = 1.0 / static_cast<double>(observed_count);
  return mix;
}

Eigen::VectorXd inlier_weights(const PosteriorMatrix& posteriors) {
  return posteriors.tau.colwise().sum().transpose();
}

Eigen::MatrixXd component_log_density(const Points3& model_normals,
                                      const Points3& observed_normals,
                                      const KentParams& kent, const Mat3& rotation) {
  const double log_c = log_normalizer(kent.kappa, kent.beta);
  const Points3 rotated = rotation * observed_normals;
  const Eigen::RowVectorXd major = kent.major_axis().transpose() * rotated;
  const Eigen::RowVectorXd minor = kent.minor_axis().transpose() * rotated;
  const Eigen::RowVectorXd oval =
      kent.beta * (major.array().square() - minor.array().square()).matrix() -
      Eigen::RowVectorXd::Constant(rotated.cols(), log_c);

  Eigen::MatrixXd out = kent.kappa * (model_normals.transpose() * rotated);
  out.rowwise() += oval;
  return out;
}

PosteriorMatrix e_step(const Points3& model_normals, const Points3& observed_normals,
                       const KentParams& kent, const Mat3& rotation,
                       const MixtureConfig& mix) {
  PosteriorMatrix post;
  post.log_tau = component_log_density(model_normals, observed_normals, kent, rotation);
  post.log_tau.array() += std::log(mix.component_weight);

  const double log_outlier = mix.pi_outlier > 0.0
                                 ? std::log(mix.pi_outlier) + std::log(mix.outlier_density)
                                 : kNegInf;
  const Eigen::Index n = observed_normals.cols();
  post.tau.resize(post.log_tau.rows(), n);
  post.tau_outlier.resize(n);
  post.log_marginal.resize(n);
  post.log_inlier_mass.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    // Column-wise log-sum-exp with a single exp pass.
    auto col = post.log_tau.col(j);
    const double hi = std::max(col.maxCoeff(), log_outlier);
    post.tau.col(j) = (col.array() - hi).exp();
    const double out = log_outlier == kNegInf ? 0.0 : std::exp(log_outlier - hi);
    const double inlier = post.tau.col(j).sum();
    const double total = inlier + out;
    const double log_p = hi + std::log(total);
    post.tau.col(j) /= total;
    col.array() -= log_p;
    post.tau_outlier(j) = out / total;
    post.log_marginal(j) = log_p;
    post.log_inlier_mass(j) =
        inlier > 0.0 ? hi + std::log(inlier) - log_p : log_sum_exp(col);
  }
  return post;
}

double q_function(const PosteriorMatrix& posteriors, const Points3& model_normals,
                  const Points3& observed_normals, const KentParams& kent,
                  const Mat3& rotation, const MixtureConfig& mix) {
  double constant = std::log(mix.component_weight);
  if (mix.pi_outlier > 0.0)
    constant += std::log(mix.pi_outlier) + std::log(mix.outlier_density);
  const Eigen::MatrixXd log_f =
      component_log_density(model_normals, observed_normals, kent, rotation);
  return (posteriors.tau.array() * (log_f.array() + constant)).sum();
}

double q_function(const PosteriorMatrix& posteriors, const MixtureConfig& mix) {
  // log pi_m + log FB5(x_n | y_m) = log tau_mn + log p(x_n).
  double outlier_terms = 0.0;
  if (mix.pi_outlier > 0.0)
    outlier_terms = std::log(mix.pi_outlier) + std::log(mix.outlier_density);
  double q = 0.0;
  for (Eigen::Index j = 0; j < posteriors.tau.cols(); ++j) {
    const double shift = posteriors.log_marginal(j) + outlier_terms;
    for (Eigen::Index i = 0; i < posteriors.tau.rows(); ++i) {
      const double t = posteriors.tau(i, j);
      if (t > 0.0) q += t * (posteriors.log_tau(i, j) + shift);
    }
  }
  return q;
}

MStepResult m_step(const PosteriorMatrix& posteriors, const Points3& model_normals,
                   const Points3& observed_normals, const KentParams& kent_prev,
                   const Mat3& rotation_prev, const MinimizeOptions& solver) {
  // Pair weights tau_mn / N_p, computed without leaving log space.
  const double log_np = log_sum_exp(posteriors.log_inlier_mass);
  if (log_np == kNegInf)
    throw DegenerateSamples(DegenerateSamples::Reason::LowWeight,
                            "m-step: posteriors carry no inlier mass");
  // Fall back to exp(log_tau - log N_p) only when tau itself underflowed.
  const Eigen::MatrixXd w = log_np > -600.0
                                ? Eigen::MatrixXd(posteriors.tau / std::exp(log_np))
                                : Eigen::MatrixXd((posteriors.log_tau.array() - log_np).exp());
  const Eigen::VectorXd per_obs = w.colwise().sum().transpose();

  RotationObjective obj;
  obj.kappa = kent_prev.kappa;
  obj.beta = kent_prev.beta;
  obj.a = axis_matrix(kent_prev);
  // Scatter about the weighted mean, not the raw second moment.
  const Vec3 mean = observed_normals * per_obs / per_obs.sum();
  obj.b = observed_normals * per_obs.asDiagonal() * observed_normals.transpose() -
          per_obs.sum() * mean * mean.transpose();
  obj.c = observed_normals * (w.transpose() * model_normals.transpose());

  MStepResult out;
  out.solver = minimize(obj, rotation_prev, solver);
  out.rotation = out.solver.rotation;
  out.kent = fit_or_saturate(out.rotation * observed_normals, per_obs);
  return out;
}

ClusterEmResult register_cluster(const Points3& model_normals,
                                 const Points3& observed_normals, double pi_outlier,
                                 const ClusterEmOptions& options) {
  if (model_normals.cols() < 5 || observed_normals.cols() < 5)
    throw TooFewPoints("cluster EM needs at least 5 normals per side");
  const MixtureConfig mix =
      MixtureConfig::make(pi_outlier, model_normals.cols(), observed_normals.cols());

  ClusterEmResult res;
  res.rotation = options.initial_rotation;
  res.kent = fit_or_saturate(res.rotation * observed_normals,
                             Eigen::VectorXd::Ones(observed_normals.cols()));
  if (options.zero_beta) res.kent.beta = 0.0;

  PosteriorMatrix post = e_step(model_normals, observed_normals, res.kent, res.rotation, mix);
  for (int it = 1; it <= options.max_iters; ++it) {
    MStepResult m = m_step(post, model_normals, observed_normals, res.kent, res.rotation,
                           options.solver);
    res.rotation = m.rotation;
    res.kent = m.kent;
    if (options.zero_beta) res.kent.beta = 0.0;

    post = e_step(model_normals, observed_normals, res.kent, res.rotation, mix);
    const double q = q_function(post, mix);
    res.q_trace.push_back(q);
    res.iterations = it;
    if (it >= 2) {
      const double prev = res.q_trace[res.q_trace.size() - 2];
      if (std::abs(q - prev) <= options.rel_tol * std::abs(q)) {
        res.converged = true;
        break;
      }
    }
  }
  return res;
}

Vec3 solve_translation(const Points3& model, const Points3& observed, const Mat3& rotation,
                       double trim_fraction) {
  return trimmed_centroid(observed, trim_fraction) -
         rotation * trimmed_centroid(model, trim_fraction);
}

namespace {

Mat3 shrink_matrix(const std::vector<Vec3>& axes) {
  Mat3 shrink = Mat3::Zero();
  for (const auto& a : axes) shrink += Mat3::Identity() - a * a.transpose();
  return shrink / static_cast<double>(axes.size());
}

bool well_spread(const std::vector<Vec3>& axes) {
  if (axes.size() < 2) return false;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(shrink_matrix(axes));
  return eig.eigenvalues().minCoeff() >= 0.05;
}

// With the twist about a_k held, the averaged update is
// (1/K) sum (I - a_k a_k^T) times the remaining error; undo that shrinkage.
Mat3 precondition_step(const Mat3& consensus, const Mat3& averaged,
                       const std::vector<Vec3>& axes) {
  const Eigen::AngleAxisd delta(averaged * consensus.transpose());
  const Vec3 w = shrink_matrix(axes).ldlt().solve(delta.angle() * delta.axis());
  if (w.norm() < 1e-300) return averaged;
  return project_to_rotation(Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix() *
                             consensus);
}

}  // namespace

RegistrationResult register_clouds(const PointCloud& model, const PointCloud& observed,
                                   const RegistrationConfig& config) {
  model.validate();
  observed.validate();

  // Directional pipeline: normals, outlier filter, clustering.
  auto prepare = [&](const PointCloud& cloud) {
    const PointCloud oriented = estimate_normals(cloud, config.normals);
    if (oriented.size() == 0) throw TooFewPoints("no surface normals could be estimated");
    const auto split =
        remove_directional_outliers(oriented.normals, config.normals.cosine_threshold);
    return select_columns(oriented.normals, split.kept);
  };
  const Points3 model_normals = prepare(model);
  const Points3 observed_normals = prepare(observed);

  const int k = std::max(1, config.clusters);
  if (model_normals.cols() < k || observed_normals.cols() < k)
    throw TooFewPoints("fewer usable normals than clusters");

  SphericalClustering model_clusters =
      spherical_kmeans(model_normals, k, config.seed, config.kmeans_max_iters);
  SphericalClustering observed_clusters;
  std::vector<std::pair<int, int>> pairs;
  if (config.cluster_mode == ClusterMode::SharedCentroids) {
    observed_clusters = assign_to_centroids(observed_normals, model_clusters.centroids);
    for (int j = 0; j < k; ++j) pairs.emplace_back(j, j);
  } else {
    observed_clusters =
        spherical_kmeans(observed_normals, k, config.seed + 1, config.kmeans_max_iters);
    pairs = match_clusters(model_clusters, observed_clusters, config.match_min_cosine);
  }

  struct Group {
    ClusterReport report;
    Points3 model, observed;
  };
  std::vector<Group> groups;
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const int min_size = std::max(5, config.min_cluster_normals);
  for (const auto& [mi, oi] : pairs) {
    Group g;
    g.report.model_cluster = mi;
    g.report.observed_cluster = oi;
    g.model = select_columns(model_normals, model_clusters.members(mi));
    g.observed = select_columns(observed_normals, observed_clusters.members(oi));
    g.report.model_normals = g.model.cols();
    g.report.observed_normals = g.observed.cols();
    if (g.model.cols() < min_size || g.observed.cols() < min_size) continue;
    g.model = subsample(g.model, config.max_normals_per_cluster, rng);
    g.observed = subsample(g.observed, config.max_normals_per_cluster, rng);
    groups.push_back(std::move(g));
  }
  if (groups.empty()) throw TooFewPoints("no matched normal clusters large enough for EM");

  RegistrationResult result;
  result.model_normals = model_normals.cols();
  result.observed_normals = observed_normals.cols();

  // A single group of normals cannot fix the rotation about its own mean
  // axis, so with two or more independent axes each group only moves the
  // two directions it observes and the average combines them.
  std::vector<Vec3> axes;
  for (const auto& g : groups) axes.push_back(g.model.rowwise().sum().normalized());
  const bool lock_twist = well_spread(axes);

  // Consensus loop: every group runs EM from the current averaged rotation.
  Mat3 consensus = config.em.initial_rotation;
  std::vector<ClusterEmResult> fits(groups.size());
  const int rounds = groups.size() > 1 ? std::max(1, config.consensus_rounds) : 1;
  double last_delta = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int round = 1; round <= rounds; ++round) {
    ClusterEmOptions opts = config.em;
    opts.initial_rotation = consensus;
    auto run = [&](std::size_t i) {
      ClusterEmOptions own = opts;
      if (lock_twist) own.solver.locked_axis = axes[i];
      return register_cluster(groups[i].model, groups[i].observed, config.pi_outlier, own);
    };
    if (config.parallel && groups.size() > 1) {
      std::vector<std::future<ClusterEmResult>> jobs;
      for (std::size_t i = 0; i < groups.size(); ++i)
        jobs.push_back(std::async(std::launch::async, run, i));
      for (std::size_t i = 0; i < groups.size(); ++i) fits[i] = jobs[i].get();
    } else {
      for (std::size_t i = 0; i < groups.size(); ++i) fits[i] = run(i);
    }

    std::vector<Mat3> rotations;
    for (std::size_t i = 0; i < fits.size(); ++i) {
      rotations.push_back(fits[i].rotation);
      groups[i].report.q_traces.push_back(fits[i].q_trace);
    }
    Mat3 next;
    try {
      next = average_rotations(rotations);
    } catch (const DegenerateMean&) {
      next = rotations.front();
      result.averaging_fallback = true;
    }
    if (lock_twist && !result.averaging_fallback)
      next = precondition_step(consensus, next, axes);
    const double delta = rotation_error(consensus, next);
    consensus = next;
    result.iterations = round;
    // A step that no longer shrinks twice in a row is the inner EM noise floor.
    stalled = delta > config.stall_ratio * last_delta ? stalled + 1 : 0;
    last_delta = delta;
    if (delta < config.consensus_tol || groups.size() == 1 || stalled >= 2) {
      result.converged = true;
      break;
    }
  }

  std::size_t longest = 0;
  for (const auto& f : fits) longest = std::max(longest, f.q_trace.size());
  result.q_trace.assign(longest, 0.0);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& f = fits[i];
    for (std::size_t j = 0; j < longest; ++j)
      result.q_trace[j] += f.q_trace.empty() ? 0.0 : f.q_trace[std::min(j, f.q_trace.size() - 1)];
    groups[i].report.rotation = f.rotation.transpose();
    groups[i].report.kent = f.kent;
    groups[i].report.iterations = f.iterations;
    result.per_cluster_rotations.push_back(f.rotation.transpose());
    result.clusters.push_back(std::move(groups[i].report));
  }

  result.transform.rotation = consensus.transpose();
  result.transform.translation = solve_translation(
      model.points, observed.points, result.transform.rotation, config.translation_trim);
  return result;
}

}  // namespace kentreg
