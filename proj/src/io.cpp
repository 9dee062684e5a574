#include "kentreg/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace kentreg {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw FileNotFound("no such file: " + path.string());
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open: " + path.string());
  return in;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view token, double& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

// Splits on whitespace and (optionally) commas.
std::vector<std::string_view> tokens(std::string_view line, bool commas) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto sep = [&](char c) {
    return std::isspace(static_cast<unsigned char>(c)) || (commas && c == ',');
  };
  while (i < line.size()) {
    while (i < line.size() && sep(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !sep(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

Points3 to_points(const std::vector<Vec3>& pts) {
  Points3 out(3, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = pts[i];
  return out;
}

PointCloud read_delimited(const std::filesystem::path& path, bool csv) {
  std::ifstream in = open_input(path);
  std::vector<Vec3> pts;
  std::string line;
  std::size_t number = 0;
  bool header_allowed = csv;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = tokens(body, csv);
    Vec3 p;
    bool ok = fields.size() >= 3;
    for (int k = 0; ok && k < 3; ++k) ok = parse_double(fields[k], p(k));
    if (!ok) {
      if (header_allowed && pts.empty()) {
        header_allowed = false;
        continue;
      }
      throw ParseError(where(path, number) + "expected three numbers");
    }
    header_allowed = false;
    pts.push_back(p);
  }
  return PointCloud(to_points(pts));
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t number = 0;
  auto next = [&]() {
    if (!std::getline(in, line)) throw ParseError(path.string() + ": unexpected end of file");
    ++number;
    return std::string(trim(line));
  };

  if (next() != "ply") throw ParseError(where(path, number) + "missing 'ply' magic");

  struct Element {
    std::string name;
    long long count = 0;
    std::vector<std::string> properties;
    bool has_list = false;
  };
  std::vector<Element> elements;
  for (;;) {
    const std::string h = next();
    const auto f = tokens(h, false);
    if (f.empty() || f[0] == "comment" || f[0] == "obj_info") continue;
    if (f[0] == "end_header") break;
    if (f[0] == "format") {
      if (f.size() < 2 || f[1] != "ascii")
        throw ParseError(where(path, number) + "only ASCII PLY is supported");
    } else if (f[0] == "element") {
      if (f.size() != 3) throw ParseError(where(path, number) + "malformed element line");
      Element e;
      e.name = std::string(f[1]);
      double c = 0;
      if (!parse_double(f[2], c) || c < 0) throw ParseError(where(path, number) + "bad count");
      e.count = static_cast<long long>(c);
      elements.push_back(e);
    } else if (f[0] == "property") {
      if (elements.empty() || f.size() < 3)
        throw ParseError(where(path, number) + "property outside an element");
      if (f[1] == "list") elements.back().has_list = true;
      elements.back().properties.emplace_back(f.back());
    } else {
      throw ParseError(where(path, number) + "unknown header keyword '" + std::string(f[0]) + "'");
    }
  }

  std::vector<Vec3> pts;
  for (const auto& e : elements) {
    if (e.name != "vertex") {
      for (long long i = 0; i < e.count; ++i) next();
      continue;
    }
    if (e.has_list) throw ParseError(path.string() + ": list properties on vertices");
    std::array<std::ptrdiff_t, 3> idx{-1, -1, -1};
    const char* names[3] = {"x", "y", "z"};
    for (int k = 0; k < 3; ++k) {
      const auto it = std::find(e.properties.begin(), e.properties.end(), names[k]);
      if (it == e.properties.end())
        throw ParseError(path.string() + ": vertex element lacks property " + names[k]);
      idx[k] = it - e.properties.begin();
    }
    pts.reserve(static_cast<std::size_t>(e.count));
    for (long long i = 0; i < e.count; ++i) {
      const std::string row = next();
      const auto f = tokens(row, false);
      if (f.size() != e.properties.size())
        throw ParseError(where(path, number) + "wrong number of vertex values");
      Vec3 p;
      for (int k = 0; k < 3; ++k)
        if (!parse_double(f[static_cast<std::size_t>(idx[k])], p(k)))
          throw ParseError(where(path, number) + "bad vertex value");
      pts.push_back(p);
    }
    break;
  }
  return PointCloud(to_points(pts));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CloudFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".xyz" || ext == ".txt") return CloudFormat::Xyz;
  if (ext == ".ply") return CloudFormat::Ply;
  if (ext == ".csv") return CloudFormat::Csv;
  throw ParseError("unrecognized point cloud extension: " + path.string());
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  return read_point_cloud(path, format_from_path(path));
}

PointCloud read_point_cloud(const std::filesystem::path& path, CloudFormat format) {
  switch (format) {
    case CloudFormat::Xyz: return read_delimited(path, false);
    case CloudFormat::Csv: return read_delimited(path, true);
    case CloudFormat::Ply: return read_ply(path);
  }
  throw ParseError("unknown format");
}

void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  const CloudFormat format = format_from_path(path);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write: " + path.string());
  const char* sep = format == CloudFormat::Csv ? "," : " ";
  if (format == CloudFormat::Csv) out << "x,y,z\n";
  if (format == CloudFormat::Ply) {
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  }
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.points.col(i);
    out << fmt(p.x()) << sep << fmt(p.y()) << sep << fmt(p.z()) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

RigidTransform parse_transform(const std::string& text) {
  std::vector<double> v;
  for (const auto tok : tokens(text, false)) {
    double x = 0;
    if (!parse_double(tok, x)) throw ParseError("transform: not a number: " + std::string(tok));
    v.push_back(x);
  }
  if (v.size() != 12)
    throw ParseError("transform: expected 12 reals, got " + std::to_string(v.size()));
  RigidTransform t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t.rotation(r, c) = v[static_cast<std::size_t>(3 * r + c)];
  t.translation = Vec3(v[9], v[10], v[11]);
  return t;
}

RigidTransform read_transform(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_transform(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_transform(const std::filesystem::path& path, const RigidTransform& transform) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write: " + path.string());
  for (int r = 0; r < 3; ++r)
    out << fmt(transform.rotation(r, 0)) << ' ' << fmt(transform.rotation(r, 1)) << ' '
        << fmt(transform.rotation(r, 2)) << '\n';
  out << fmt(transform.translation.x()) << ' ' << fmt(transform.translation.y()) << ' '
      << fmt(transform.translation.z()) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

RigidTransform SceneConfig::ground_truth(std::uint64_t seed) const {
  if (transform) return *transform;
  std::mt19937_64 rng(seed);
  return random_transform(rng, max_rotation, max_translation);
}

SceneConfig parse_scene_config(const std::string& text) {
  SceneConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto f = tokens(line, false);
    if (f.empty()) continue;

    const std::string key(f[0]);
    std::vector<double> v;
    for (std::size_t i = 1; i < f.size(); ++i) {
      double x = 0;
      if (!parse_double(f[i], x))
        throw ParseError("scene config line " + std::to_string(number) + ": bad number '" +
                         std::string(f[i]) + "'");
      v.push_back(x);
    }
    auto expect = [&](std::size_t n) {
      if (v.size() != n)
        throw ParseError("scene config line " + std::to_string(number) + ": '" + key +
                         "' takes " + std::to_string(n) + " values");
    };

    if (key == "plane") {
      expect(6);
      PlaneSpec p;
      p.normal = Vec3(v[0], v[1], v[2]);
      if (p.normal.norm() < 1e-12)
        throw ParseError("scene config line " + std::to_string(number) + ": zero normal");
      p.normal.normalize();
      p.offset = v[3];
      p.extent = v[4];
      p.point_count = static_cast<Eigen::Index>(v[5]);
      cfg.scene.planes.push_back(p);
    } else if (key == "noise_sigma") {
      expect(1);
      cfg.scene.noise_sigma = v[0];
    } else if (key == "outlier_fraction") {
      expect(1);
      cfg.scene.outlier_fraction = v[0];
    } else if (key == "outlier_box") {
      expect(6);
      cfg.scene.outlier_box = Eigen::AlignedBox3d(Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]));
    } else if (key == "seed") {
      expect(1);
      cfg.scene.seed = static_cast<std::uint64_t>(v[0]);
    } else if (key == "max_rotation_deg") {
      expect(1);
      cfg.max_rotation = v[0] * std::numbers::pi / 180.0;
    } else if (key == "max_translation") {
      expect(1);
      cfg.max_translation = v[0];
    } else if (key == "transform") {
      expect(12);
      RigidTransform t;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) t.rotation(r, c) = v[static_cast<std::size_t>(3 * r + c)];
      t.translation = Vec3(v[9], v[10], v[11]);
      cfg.transform = t;
    } else {
      throw ParseError("scene config line " + std::to_string(number) + ": unknown key '" +
                       key + "'");
    }
  }
  try {
    cfg.scene.validate();
  } catch (const InvalidParams& e) {
    throw ParseError(std::string("scene config: ") + e.what());
  }
  return cfg;
}

SceneConfig read_scene_config(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_config(ss.str());
}

}  // namespace kentreg
