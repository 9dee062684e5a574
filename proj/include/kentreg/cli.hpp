#pragma once

#include <cstdint>
#include <optional>
#include <ostream>

#include "kentreg/geometry.hpp"
#include "kentreg/report.hpp"

namespace kentreg {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitFileNotFound = 2,
  kExitParseError = 3,
  kExitDegenerateInput = 4,
};

struct RegisterOptions {
  double downsample = 0.1;
  int k_neighbors = 15;
  int clusters = 4;
  double pi_outlier = 0.1;
  std::uint64_t seed = 0;
};

// Uniform random subset of round(fraction * N) points (at least one), in
// their original order. Fractions >= 1 keep everything.
PointCloud downsample(const PointCloud& cloud, double fraction, std::uint64_t seed);

// Downsamples both clouds with the same seed, registers them and, when a
// ground truth is given, fills in e_R and e_t.
RunReport register_pair(const PointCloud& model, const PointCloud& observed,
                        const RegisterOptions& options,
                        const std::optional<RigidTransform>& truth = std::nullopt);

// Entry point behind the `kentreg` executable. Subcommands: register,
// benchmark, synth. Returns one of the ExitCode values.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kentreg
