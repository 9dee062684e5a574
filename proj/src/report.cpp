#include "kentreg/report.hpp"

#include <json.hpp>

namespace kentreg {

using nlohmann::json;

namespace {

json row_major(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

Mat3 mat_from(const json& a) {
  if (!a.is_array() || a.size() != 9) throw ParseError("report: rotation needs 9 reals");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = a.at(static_cast<std::size_t>(3 * r + c)).get<double>();
  return m;
}

}  // namespace

bool operator==(const RunReport& a, const RunReport& b) {
  return a.transform.rotation == b.transform.rotation &&
         a.transform.translation == b.transform.translation && a.e_R == b.e_R &&
         a.e_t == b.e_t && a.q_trace == b.q_trace && a.clusters == b.clusters &&
         a.converged == b.converged && a.rounds == b.rounds && a.timings_ms == b.timings_ms &&
         a.config == b.config;
}

RunReport make_report(const RegistrationResult& result) {
  RunReport r;
  r.transform = result.transform;
  r.q_trace = result.q_trace;
  r.converged = result.converged;
  r.rounds = result.iterations;
  for (const auto& c : result.clusters) {
    ClusterDiagnostics d;
    d.model_cluster = c.model_cluster;
    d.observed_cluster = c.observed_cluster;
    d.model_normals = c.model_normals;
    d.observed_normals = c.observed_normals;
    d.kappa = c.kent.kappa;
    d.beta = c.kent.beta;
    d.iterations = c.iterations;
    d.rotation = c.rotation;
    r.clusters.push_back(d);
  }
  return r;
}

std::string to_json(const RunReport& report, int indent) {
  json j;
  const Vec3& t = report.transform.translation;
  j["transform"] = {{"rotation", row_major(report.transform.rotation)},
                    {"translation", {t.x(), t.y(), t.z()}}};
  if (report.e_R) j["e_R"] = *report.e_R;
  if (report.e_t) j["e_t"] = *report.e_t;
  j["q_trace"] = report.q_trace;
  j["converged"] = report.converged;
  j["rounds"] = report.rounds;
  j["clusters"] = json::array();
  for (const auto& c : report.clusters) {
    j["clusters"].push_back({{"model_cluster", c.model_cluster},
                             {"observed_cluster", c.observed_cluster},
                             {"model_normals", c.model_normals},
                             {"observed_normals", c.observed_normals},
                             {"kappa", c.kappa},
                             {"beta", c.beta},
                             {"iterations", c.iterations},
                             {"rotation", row_major(c.rotation)}});
  }
  j["timings_ms"] = report.timings_ms;
  j["config"] = report.config;
  return j.dump(indent);
}

RunReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunReport r;
    r.transform.rotation = mat_from(j.at("transform").at("rotation"));
    const json& t = j.at("transform").at("translation");
    if (!t.is_array() || t.size() != 3) throw ParseError("report: translation needs 3 reals");
    r.transform.translation = Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
    if (j.contains("e_R")) r.e_R = j["e_R"].get<double>();
    if (j.contains("e_t")) r.e_t = j["e_t"].get<double>();
    r.q_trace = j.at("q_trace").get<std::vector<double>>();
    r.converged = j.at("converged").get<bool>();
    r.rounds = j.at("rounds").get<int>();
    for (const auto& c : j.at("clusters")) {
      ClusterDiagnostics d;
      d.model_cluster = c.at("model_cluster").get<int>();
      d.observed_cluster = c.at("observed_cluster").get<int>();
      d.model_normals = c.at("model_normals").get<long long>();
      d.observed_normals = c.at("observed_normals").get<long long>();
      d.kappa = c.at("kappa").get<double>();
      d.beta = c.at("beta").get<double>();
      d.iterations = c.at("iterations").get<int>();
      d.rotation = mat_from(c.at("rotation"));
      r.clusters.push_back(d);
    }
    r.timings_ms = j.at("timings_ms").get<std::map<std::string, double>>();
    r.config = j.at("config").get<std::map<std::string, std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

}  // namespace kentreg
