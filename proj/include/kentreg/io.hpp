#pragma once

#include <filesystem>
#include <numbers>
#include <optional>
#include <string>

#include "kentreg/geometry.hpp"
#include "kentreg/synthetic.hpp"

namespace kentreg {

enum class CloudFormat { Xyz, Ply, Csv };

// Picks the format from the extension: .xyz/.txt, .ply, .csv.
// Throws ParseError for anything else.
CloudFormat format_from_path(const std::filesystem::path& path);

// ASCII readers. XYZ takes the first three numbers of every non-empty line;
// CSV does the same with commas and skips one non-numeric header line; PLY
// reads the x/y/z properties of the vertex element.
// Throws FileNotFound or ParseError.
PointCloud read_point_cloud(const std::filesystem::path& path);
PointCloud read_point_cloud(const std::filesystem::path& path, CloudFormat format);

// Values are written with 17 significant digits so a write/read cycle is
// exact. Throws IoError.
void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

// Twelve whitespace-separated reals: the rotation row-major, then the
// translation.
RigidTransform parse_transform(const std::string& text);
RigidTransform read_transform(const std::filesystem::path& path);
void write_transform(const std::filesystem::path& path, const RigidTransform& transform);

// Plain-text scene description, one directive per line, '#' starts a comment:
//
//   plane nx ny nz offset extent count
//   noise_sigma s
//   outlier_fraction f
//   outlier_box xmin ymin zmin xmax ymax zmax
//   seed n
//   max_rotation_deg a       (random ground truth, default 15)
//   max_translation d        (default 0.5)
//   transform r00 r01 ... r22 tx ty tz   (fixed ground truth instead)
struct SceneConfig {
  SceneSpec scene;
  double max_rotation = 15.0 * std::numbers::pi / 180.0;  // radians
  double max_translation = 0.5;
  std::optional<RigidTransform> transform;

  // The fixed transform if given, otherwise one drawn from `seed`.
  RigidTransform ground_truth(std::uint64_t seed) const;
};

SceneConfig parse_scene_config(const std::string& text);
SceneConfig read_scene_config(const std::filesystem::path& path);

}  // namespace kentreg
