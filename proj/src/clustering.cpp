#include "kentreg/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <tuple>

#include "kentreg/errors.hpp"

namespace kentreg {

namespace {

std::vector<int> assign(const Points3& normals, const Points3& centroids) {
  const Eigen::MatrixXd sim = centroids.transpose() * normals;  // k x n
  std::vector<int> out(static_cast<std::size_t>(normals.cols()));
  for (Eigen::Index i = 0; i < normals.cols(); ++i) {
    Eigen::Index best;
    sim.col(i).maxCoeff(&best);  // first maximum on ties
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double objective(const Points3& normals, const Points3& centroids,
                 const std::vector<int>& assignments) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < normals.cols(); ++i)
    total += normals.col(i).dot(centroids.col(assignments[static_cast<std::size_t>(i)]));
  return total;
}

// Moves the worst-fitting members into empty clusters. Returns true if any
// cluster was empty.
bool repair_empty(const Points3& normals, Points3& centroids, std::vector<int>& assignments) {
  const int k = static_cast<int>(centroids.cols());
  bool repaired = false;
  for (int j = 0; j < k; ++j) {
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int a : assignments) ++counts[static_cast<std::size_t>(a)];
    if (counts[static_cast<std::size_t>(j)] > 0) continue;
    repaired = true;

    Eigen::Index worst = -1;
    double worst_sim = 2.0;
    for (Eigen::Index i = 0; i < normals.cols(); ++i) {
      const int a = assignments[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(a)] < 2) continue;
      const double s = normals.col(i).dot(centroids.col(a));
      if (s < worst_sim) {
        worst_sim = s;
        worst = i;
      }
    }
    if (worst < 0) continue;
    assignments[static_cast<std::size_t>(worst)] = j;
    centroids.col(j) = normals.col(worst);
  }
  return repaired;
}

void update_centroids(const Points3& normals, const std::vector<int>& assignments,
                      Points3& centroids) {
  Points3 sums = Points3::Zero(3, centroids.cols());
  for (Eigen::Index i = 0; i < normals.cols(); ++i)
    sums.col(assignments[static_cast<std::size_t>(i)]) += normals.col(i);
  for (Eigen::Index j = 0; j < centroids.cols(); ++j)
    if (sums.col(j).norm() > 1e-12) centroids.col(j) = sums.col(j).normalized();
}

Points3 seed_centroids(const Points3& normals, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::Index n = normals.cols();
  Points3 centroids(3, k);
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  Eigen::Index idx = first(rng);
  centroids.col(0) = normals.col(idx);
  chosen[static_cast<std::size_t>(idx)] = true;

  Eigen::VectorXd dist = (1.0 - (normals.transpose() * normals.col(idx)).array()).max(0.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int j = 1; j < k; ++j) {
    const double total = dist.sum();
    if (total > 1e-15) {
      const double target = unif(rng) * total;
      double acc = 0.0;
      idx = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist(i);
        if (acc >= target && dist(i) > 0.0) {
          idx = i;
          break;
        }
      }
    } else {
      // Fewer distinct directions than clusters: take the next unused point.
      idx = 0;
      while (idx + 1 < n && chosen[static_cast<std::size_t>(idx)]) ++idx;
    }
    chosen[static_cast<std::size_t>(idx)] = true;
    centroids.col(j) = normals.col(idx);
    dist = dist.cwiseMin(
        (1.0 - (normals.transpose() * normals.col(idx)).array()).max(0.0).matrix());
  }
  return centroids;
}

void canonicalize(SphericalClustering& c) {
  const int k = c.k();
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::make_tuple(c.centroids(0, a), c.centroids(1, a), c.centroids(2, a)) <
           std::make_tuple(c.centroids(0, b), c.centroids(1, b), c.centroids(2, b));
  });
  std::vector<int> relabel(static_cast<std::size_t>(k));
  Points3 sorted(3, k);
  for (int j = 0; j < k; ++j) {
    sorted.col(j) = c.centroids.col(order[static_cast<std::size_t>(j)]);
    relabel[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] = j;
  }
  c.centroids = std::move(sorted);
  for (int& a : c.assignments) a = relabel[static_cast<std::size_t>(a)];
}

}  // namespace

std::vector<Eigen::Index> SphericalClustering::members(int cluster) const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == cluster) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

SphericalClustering spherical_kmeans(const Points3& normals, int k, std::uint64_t seed,
                                     int max_iters) {
  if (k < 1) throw Error("spherical k-means needs k >= 1");
  if (normals.cols() < k) throw TooFewPoints("fewer normals than clusters");

  SphericalClustering result;
  result.centroids = seed_centroids(normals, k, seed);
  std::vector<int> previous;
  for (int it = 0; it < std::max(1, max_iters); ++it) {
    result.assignments = assign(normals, result.centroids);
    repair_empty(normals, result.centroids, result.assignments);
    update_centroids(normals, result.assignments, result.centroids);
    result.objective_trace.push_back(
        objective(normals, result.centroids, result.assignments));
    result.iterations = it + 1;
    if (result.assignments == previous) break;
    previous = result.assignments;
  }
  canonicalize(result);
  return result;
}

SphericalClustering assign_to_centroids(const Points3& normals, const Points3& centroids) {
  SphericalClustering result;
  result.centroids = centroids;
  result.assignments = assign(normals, centroids);
  result.objective_trace.push_back(objective(normals, centroids, result.assignments));
  return result;
}

std::vector<std::pair<int, int>> match_clusters(const SphericalClustering& model,
                                                const SphericalClustering& observed,
                                                double min_cosine) {
  struct Candidate {
    double cosine;
    int model, observed;
  };
  std::vector<Candidate> candidates;
  for (int i = 0; i < model.k(); ++i)
    for (int j = 0; j < observed.k(); ++j)
      candidates.push_back({model.centroids.col(i).dot(observed.centroids.col(j)), i, j});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.cosine > b.cosine; });

  std::vector<bool> used_model(static_cast<std::size_t>(model.k()), false);
  std::vector<bool> used_observed(static_cast<std::size_t>(observed.k()), false);
  std::vector<std::pair<int, int>> pairs;
  for (const auto& c : candidates) {
    if (c.cosine < min_cosine) break;
    if (used_model[static_cast<std::size_t>(c.model)] ||
        used_observed[static_cast<std::size_t>(c.observed)])
      continue;
    used_model[static_cast<std::size_t>(c.model)] = true;
    used_observed[static_cast<std::size_t>(c.observed)] = true;
    pairs.emplace_back(c.model, c.observed);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace kentreg
