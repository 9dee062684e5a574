#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kentreg/em_registration.hpp"
#include "kentreg/geometry.hpp"

namespace kentreg {

struct ClusterDiagnostics {
  int model_cluster = -1;
  int observed_cluster = -1;
  long long model_normals = 0;
  long long observed_normals = 0;
  double kappa = 0.0;
  double beta = 0.0;
  int iterations = 0;
  Mat3 rotation = Mat3::Identity();

  bool operator==(const ClusterDiagnostics&) const = default;
};

// Outcome of one `register` run, serialized as JSON.
struct RunReport {
  RigidTransform transform;
  std::optional<double> e_R;  // radians, only with ground truth
  std::optional<double> e_t;  // meters, only with ground truth
  std::vector<double> q_trace;
  std::vector<ClusterDiagnostics> clusters;
  bool converged = false;
  int rounds = 0;
  std::map<std::string, double> timings_ms;
  std::map<std::string, std::string> config;
};

bool operator==(const RunReport& a, const RunReport& b);

RunReport make_report(const RegistrationResult& result);

std::string to_json(const RunReport& report, int indent = 2);

// Throws ParseError on malformed or incomplete input.
RunReport report_from_json(const std::string& text);

}  // namespace kentreg
