#include "kentreg/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <thread>

namespace kentreg {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

ScenePair benchmark_pair(const SceneConfig& config, double outlier_fraction, int trial,
                         std::uint64_t seed) {
  // The clean surfaces and the ground truth depend on the trial only, so a
  // trial differs across fractions just by its outliers.
  const std::uint64_t base =
      splitmix(splitmix(config.scene.seed ^ seed) + static_cast<std::uint64_t>(trial));
  SceneSpec spec = config.scene;
  spec.outlier_fraction = outlier_fraction;
  spec.seed = base;
  return make_pair(spec, config.ground_truth(splitmix(base)));
}

std::vector<BenchmarkRow> run_benchmark(const SceneConfig& config,
                                        const BenchmarkOptions& options) {
  struct Task {
    double fraction;
    int trial;
  };
  std::vector<Task> tasks;
  for (const double f : options.outlier_fractions)
    for (int t = 0; t < options.trials; ++t) tasks.push_back({f, t});

  std::vector<BenchmarkRow> rows(2 * tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto worker = [&]() {
    for (std::size_t i = next++; i < tasks.size() && !failed; i = next++) {
      try {
        const Task& task = tasks[i];
        const ScenePair pair = benchmark_pair(config, task.fraction, task.trial, options.seed);

        BenchmarkRow& kent = rows[2 * i];
        kent.outlier_fraction = task.fraction;
        kent.method = "kent";
        kent.trial = task.trial;
        RegistrationConfig cfg = options.kent;
        cfg.pi_outlier = options.pi_outlier.value_or(std::max(cfg.pi_outlier, task.fraction));
        cfg.parallel = false;
        auto start = std::chrono::steady_clock::now();
        const RegistrationResult res =
            register_clouds(pair.model.cloud, pair.observed.cloud, cfg);
        kent.runtime_ms = elapsed_ms(start);
        kent.e_R = rotation_error(pair.truth.rotation, res.transform.rotation);
        kent.e_t = translation_error(pair.truth.translation, res.transform.translation);
        for (const auto& c : res.clusters)
          kent.q_traces.insert(kent.q_traces.end(), c.q_traces.begin(), c.q_traces.end());

        BenchmarkRow& icp = rows[2 * i + 1];
        icp.outlier_fraction = task.fraction;
        icp.method = "icp";
        icp.trial = task.trial;
        start = std::chrono::steady_clock::now();
        const IcpResult ires = icp_register(pair.model.cloud, pair.observed.cloud, options.icp);
        icp.runtime_ms = elapsed_ms(start);
        icp.e_R = rotation_error(pair.truth.rotation, ires.transform.rotation);
        icp.e_t = translation_error(pair.truth.translation, ires.transform.translation);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(rows.begin(), rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
    if (a.outlier_fraction != b.outlier_fraction) return a.outlier_fraction < b.outlier_fraction;
    if (a.method != b.method) return a.method < b.method;
    return a.trial < b.trial;
  });
  return rows;
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows) {
  out << "outlier_fraction,method,trial,e_R,e_t\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%d,%.17g,%.17g\n", r.outlier_fraction,
                  r.method.c_str(), r.trial, r.e_R, r.e_t);
    out << buf;
  }
}

}  // namespace kentreg
