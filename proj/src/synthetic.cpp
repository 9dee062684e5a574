#include "kentreg/synthetic.hpp"

#include <algorithm>
#include <numeric>

#include "kentreg/kent.hpp"

namespace kentreg {

namespace {

struct CleanScene {
  Points3 points;
  std::vector<int> plane_index;
};

CleanScene sample_surfaces(const SceneSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  CleanScene out;
  out.points.resize(3, spec.total_points());
  out.plane_index.reserve(static_cast<std::size_t>(spec.total_points()));
  Eigen::Index col = 0;
  for (std::size_t p = 0; p < spec.planes.size(); ++p) {
    const PlaneSpec& plane = spec.planes[p];
    const Mat3 frame = frame_from_mean(plane.normal);
    const Vec3 center = plane.offset * plane.normal.normalized();
    for (Eigen::Index i = 0; i < plane.point_count; ++i, ++col) {
      const double u = plane.extent * unif(rng);
      const double v = plane.extent * unif(rng);
      out.points.col(col) = center + u * frame.col(1) + v * frame.col(2);
      out.plane_index.push_back(static_cast<int>(p));
    }
  }
  return out;
}

Eigen::AlignedBox3d default_outlier_box(const Points3& points) {
  Eigen::AlignedBox3d box(points.rowwise().minCoeff(), points.rowwise().maxCoeff());
  const Vec3 c = box.center();
  const Vec3 half = 0.75 * box.sizes();
  return {c - half, c + half};
}

SceneSample corrupt(const SceneSpec& spec, const CleanScene& clean, std::uint64_t stream) {
  std::mt19937_64 rng(spec.seed * 0x9e3779b97f4a7c15ULL + stream);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SceneSample out;
  out.cloud.points = clean.points;
  out.plane_index = clean.plane_index;
  const Eigen::Index n = clean.points.cols();
  out.outlier.assign(static_cast<std::size_t>(n), false);
  if (spec.noise_sigma > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i)
      out.cloud.points.col(i) +=
          spec.noise_sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
  }

  const auto count = static_cast<Eigen::Index>(
      std::floor(spec.outlier_fraction * static_cast<double>(n)));
  if (count > 0) {
    const Eigen::AlignedBox3d box =
        spec.outlier_box.value_or(default_outlier_box(clean.points));
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    for (Eigen::Index j = 0; j < count; ++j) {
      const Eigen::Index i = idx[static_cast<std::size_t>(j)];
      const Vec3 u(unif(rng), unif(rng), unif(rng));
      out.cloud.points.col(i) = box.min() + u.cwiseProduct(box.sizes());
      out.outlier[static_cast<std::size_t>(i)] = true;
      out.plane_index[static_cast<std::size_t>(i)] = -1;
    }
  }
  return out;
}

}  // namespace

void SceneSpec::validate() const {
  if (planes.size() < 2) throw InvalidParams("scene needs at least two planes");
  bool distinct = false;
  for (std::size_t i = 0; i < planes.size() && !distinct; ++i)
    for (std::size_t j = i + 1; j < planes.size() && !distinct; ++j)
      distinct = planes[i].normal.normalized().cross(planes[j].normal.normalized()).norm() > 1e-6;
  if (!distinct) throw InvalidParams("scene planes must not all be parallel");
  for (const auto& p : planes) {
    if (p.normal.norm() < 1e-12) throw InvalidParams("plane normal is zero");
    if (p.point_count < 0 || p.extent < 0.0) throw InvalidParams("negative plane size");
  }
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0))
    throw InvalidParams("outlier fraction must lie in [0, 1)");
  if (noise_sigma < 0.0) throw InvalidParams("noise sigma must be non-negative");
}

Eigen::Index SceneSpec::total_points() const {
  Eigen::Index n = 0;
  for (const auto& p : planes) n += p.point_count;
  return n;
}

SceneSample generate_scene(const SceneSpec& spec) {
  spec.validate();
  return corrupt(spec, sample_surfaces(spec), 1);
}

ScenePair make_pair(const SceneSpec& spec, const RigidTransform& truth) {
  spec.validate();
  const CleanScene clean = sample_surfaces(spec);
  ScenePair pair;
  pair.truth = truth;
  pair.model = corrupt(spec, clean, 1);
  pair.observed = corrupt(spec, clean, 2);
  pair.observed.cloud.points = apply_transform(truth, pair.observed.cloud.points);
  return pair;
}

RigidTransform random_transform(std::mt19937_64& rng, double max_angle,
                                double max_translation) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Points3 dirs = sample_uniform_sphere(2, rng);
  RigidTransform t;
  t.rotation = axis_angle<double>(dirs.col(0), max_angle * unif(rng));
  t.translation = max_translation * unif(rng) * dirs.col(1);
  return t;
}

SceneSpec two_plane_scene(Eigen::Index points, std::uint64_t seed) {
  SceneSpec spec;
  spec.planes.push_back({Vec3::UnitX(), 2.0, 3.0, points / 2});
  spec.planes.push_back({Vec3::UnitZ(), -1.0, 3.0, points - points / 2});
  spec.seed = seed;
  return spec;
}

}  // namespace kentreg
