#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kentreg/em_registration.hpp"
#include "kentreg/icp.hpp"
#include "kentreg/io.hpp"

namespace kentreg {

struct BenchmarkOptions {
  std::vector<double> outlier_fractions{0.0, 0.05, 0.1, 0.15, 0.2};
  int trials = 20;
  int jobs = 1;
  std::uint64_t seed = 0;
  RegistrationConfig kent;
  // Unset: pi0 = max(kent.pi_outlier, injected fraction) for each sweep point.
  std::optional<double> pi_outlier;
  IcpConfig icp;
};

struct BenchmarkRow {
  double outlier_fraction = 0.0;
  std::string method;  // "icp" or "kent"
  int trial = 0;
  double e_R = 0.0;  // radians
  double e_t = 0.0;  // meters
  double runtime_ms = 0.0;
  std::vector<std::vector<double>> q_traces;  // kent only: every per-cluster EM trace
};

// Scene and ground truth for one sweep point. Both methods see the same pair.
ScenePair benchmark_pair(const SceneConfig& config, double outlier_fraction, int trial,
                         std::uint64_t seed);

// Runs every (fraction, method, trial) combination, up to `jobs` at a time.
// Rows come back sorted by fraction, then method, then trial.
std::vector<BenchmarkRow> run_benchmark(const SceneConfig& config,
                                        const BenchmarkOptions& options);

// Header "outlier_fraction,method,trial,e_R,e_t" plus one line per row.
void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

}  // namespace kentreg
