#include "kentreg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "kentreg/benchmark.hpp"
#include "kentreg/io.hpp"

namespace kentreg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

std::string str(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

RegistrationConfig pipeline_config(const RegisterOptions& o) {
  RegistrationConfig cfg;
  cfg.normals.k_neighbors = o.k_neighbors;
  cfg.clusters = o.clusters;
  cfg.pi_outlier = o.pi_outlier;
  cfg.seed = o.seed;
  return cfg;
}

// Writes to the file when a path is given, otherwise to `out`.
template <typename F>
void emit(const std::string& path, std::ostream& out, F&& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw IoError("cannot write: " + path);
  write(file);
  if (!file) throw IoError("write failed: " + path);
}

}  // namespace

PointCloud downsample(const PointCloud& cloud, double fraction, std::uint64_t seed) {
  const Eigen::Index n = cloud.size();
  if (fraction >= 1.0 || n == 0) return cloud;
  if (!(fraction > 0.0)) throw InvalidParams("downsample fraction must be positive");
  const auto keep = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n))));

  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::vector<Eigen::Index> picked;
  picked.reserve(static_cast<std::size_t>(keep));
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), keep, rng);

  PointCloud out;
  out.points = cloud.points(Eigen::all, picked);
  if (cloud.has_normals()) out.normals = cloud.normals(Eigen::all, picked);
  return out;
}

RunReport register_pair(const PointCloud& model, const PointCloud& observed,
                        const RegisterOptions& options,
                        const std::optional<RigidTransform>& truth) {
  auto t0 = Clock::now();
  const PointCloud m = downsample(model, options.downsample, options.seed);
  const PointCloud o = downsample(observed, options.downsample, options.seed);
  const double t_down = ms_since(t0);

  t0 = Clock::now();
  const RegistrationResult result = register_clouds(m, o, pipeline_config(options));
  const double t_reg = ms_since(t0);

  RunReport report = make_report(result);
  if (truth) {
    report.e_R = rotation_error(truth->rotation, result.transform.rotation);
    report.e_t = translation_error(truth->translation, result.transform.translation);
  }
  report.timings_ms["downsample"] = t_down;
  report.timings_ms["register"] = t_reg;
  report.config = {{"downsample", str(options.downsample)},
                   {"k_neighbors", std::to_string(options.k_neighbors)},
                   {"clusters", std::to_string(options.clusters)},
                   {"pi0", str(options.pi_outlier)},
                   {"seed", std::to_string(options.seed)},
                   {"model_points", std::to_string(m.size())},
                   {"observed_points", std::to_string(o.size())}};
  return report;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kent-mixture EM point cloud registration"};
  app.require_subcommand(1);

  RegisterOptions reg;
  std::string model_path, observed_path, gt_path, out_path;
  auto* cmd_reg = app.add_subcommand("register", "Register an observed cloud to a model cloud");
  cmd_reg->add_option("model", model_path, "Model cloud (.xyz, .ply, .csv)")->required();
  cmd_reg->add_option("observed", observed_path, "Observed cloud")->required();
  cmd_reg->add_option("--downsample", reg.downsample, "Fraction of points kept")
      ->capture_default_str();
  cmd_reg->add_option("--k-neighbors", reg.k_neighbors, "Neighbours for normal estimation")
      ->capture_default_str()
      ->check(CLI::Range(3, 1000));
  cmd_reg->add_option("--clusters", reg.clusters, "Number of normal clusters")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_reg->add_option("--pi0", reg.pi_outlier, "Outlier weight")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.999999));
  cmd_reg->add_option("--seed", reg.seed, "Random seed")->capture_default_str();
  cmd_reg->add_option("--gt", gt_path, "Ground-truth transform file (12 reals)");
  cmd_reg->add_option("--out", out_path, "Report path (default stdout)");

  std::string config_path;
  BenchmarkOptions bench;
  std::optional<int> bench_clusters;
  std::optional<double> bench_pi0;
  int bench_k = 15;
  auto* cmd_bench = app.add_subcommand("benchmark", "Outlier sweep of the Kent method and ICP");
  cmd_bench->add_option("config", config_path, "Scene config file")->required();
  cmd_bench->add_option("--fractions", bench.outlier_fractions, "Outlier fractions")
      ->delimiter(',')
      ->capture_default_str();
  cmd_bench->add_option("--trials", bench.trials, "Trials per fraction")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_bench->add_option("--jobs", bench.jobs, "Concurrent trials")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_bench->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
  cmd_bench->add_option("--clusters", bench_clusters,
                        "Normal clusters (default: planes in the scene)");
  cmd_bench->add_option("--pi0", bench_pi0, "Outlier weight (default: max(0.1, fraction))");
  cmd_bench->add_option("--k-neighbors", bench_k, "Neighbours for normal estimation")
      ->capture_default_str()
      ->check(CLI::Range(3, 1000));
  cmd_bench->add_option("--out", out_path, "CSV path (default stdout)");

  std::string synth_model, synth_observed, synth_gt;
  std::optional<std::uint64_t> synth_seed;
  auto* cmd_synth = app.add_subcommand("synth", "Write a synthetic model/observed pair");
  cmd_synth->add_option("config", config_path, "Scene config file")->required();
  cmd_synth->add_option("model", synth_model, "Output model cloud")->required();
  cmd_synth->add_option("observed", synth_observed, "Output observed cloud")->required();
  cmd_synth->add_option("gt", synth_gt, "Output ground-truth transform")->required();
  cmd_synth->add_option("--seed", synth_seed, "Seed for the ground truth (default: scene seed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (*cmd_reg) {
      const auto t0 = Clock::now();
      const PointCloud model = read_point_cloud(model_path);
      const PointCloud observed = read_point_cloud(observed_path);
      std::optional<RigidTransform> truth;
      if (!gt_path.empty()) truth = read_transform(gt_path);
      const double t_load = ms_since(t0);
      RunReport report = register_pair(model, observed, reg, truth);
      report.timings_ms["load"] = t_load;
      report.timings_ms["total"] = ms_since(t0);
      const std::string text = to_json(report) + "\n";
      emit(out_path, out, [&](std::ostream& os) { os << text; });
    } else if (*cmd_bench) {
      const SceneConfig cfg = read_scene_config(config_path);
      bench.kent.clusters = bench_clusters.value_or(static_cast<int>(cfg.scene.planes.size()));
      bench.kent.normals.k_neighbors = bench_k;
      bench.pi_outlier = bench_pi0;
      const auto rows = run_benchmark(cfg, bench);
      emit(out_path, out, [&](std::ostream& os) { write_benchmark_csv(os, rows); });
    } else if (*cmd_synth) {
      const SceneConfig cfg = read_scene_config(config_path);
      const ScenePair pair =
          make_pair(cfg.scene, cfg.ground_truth(synth_seed.value_or(cfg.scene.seed)));
      write_point_cloud(synth_model, pair.model.cloud);
      write_point_cloud(synth_observed, pair.observed.cloud);
      write_transform(synth_gt, pair.truth);
    }
  } catch (const FileNotFound& e) {
    err << "error: " << e.what() << '\n';
    return kExitFileNotFound;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParseError;
  } catch (const TooFewPoints& e) {
    err << "error: degenerate input: " << e.what() << '\n';
    return kExitDegenerateInput;
  } catch (const DegenerateMean& e) {
    err << "error: degenerate input: " << e.what() << '\n';
    return kExitDegenerateInput;
  } catch (const DegenerateSamples& e) {
    err << "error: degenerate input: " << e.what() << '\n';
    return kExitDegenerateInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace kentreg
