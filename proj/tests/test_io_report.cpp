#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

#include "kentreg/errors.hpp"
#include "kentreg/io.hpp"
#include "kentreg/report.hpp"
#include "test_support.hpp"

using namespace kentreg;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kentreg_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path file(const std::string& name, const std::string& content) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << content;
    return p;
  }

  fs::path dir_;
};

PointCloud awkward_cloud() {
  Points3 pts(3, 4);
  pts << 0.1, -1e-300, 1.0 / 3.0, 12345.678901234567,
         std::numbers::pi, 0.0, -2.5e17, 7.0,
         -0.0, 1e-17, std::numbers::e, -1.0 / 7.0;
  return PointCloud(pts);
}

}  // namespace

using PointCloudIo = TempDir;

TEST_F(PointCloudIo, RoundTripIsExactInEveryFormat) {
  const PointCloud cloud = awkward_cloud();
  for (const std::string ext : {".xyz", ".txt", ".ply", ".csv"}) {
    const fs::path p = dir_ / ("cloud" + ext);
    write_point_cloud(p, cloud);
    const PointCloud back = read_point_cloud(p);
    EXPECT_EQ(back.points, cloud.points) << ext;
  }
}

TEST_F(PointCloudIo, XyzIgnoresExtraColumnsBlankLinesAndComments) {
  const fs::path p = file("a.xyz", "# comment\n1 2 3 0 0 1\n\n  4 5 6\n");
  const PointCloud c = read_point_cloud(p);
  ASSERT_EQ(c.size(), 2);
  EXPECT_EQ(Vec3(c.points.col(1)), Vec3(4, 5, 6));
}

TEST_F(PointCloudIo, CsvSkipsOneHeader) {
  const PointCloud c = read_point_cloud(file("a.csv", "x,y,z\n1,2,3\n4,5,6\n"));
  EXPECT_EQ(c.size(), 2);
  EXPECT_THROW(read_point_cloud(file("b.csv", "x,y,z\nu,v,w\n1,2,3\n")), ParseError);
}

TEST_F(PointCloudIo, PlyWithExtraPropertiesAndElements) {
  const std::string text =
      "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\n"
      "property float nx\nproperty float x\nproperty float y\nproperty float z\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
      "9 1 2 3\n9 4 5 6\n3 0 1 1\n";
  const PointCloud c = read_point_cloud(file("a.ply", text));
  ASSERT_EQ(c.size(), 2);
  EXPECT_EQ(Vec3(c.points.col(0)), Vec3(1, 2, 3));
  EXPECT_EQ(Vec3(c.points.col(1)), Vec3(4, 5, 6));
}

TEST_F(PointCloudIo, Errors) {
  EXPECT_THROW(read_point_cloud(dir_ / "missing.xyz"), FileNotFound);
  EXPECT_THROW(read_point_cloud(file("a.obj", "v 1 2 3\n")), ParseError);
  EXPECT_THROW(read_point_cloud(file("b.xyz", "1 2\n")), ParseError);
  EXPECT_THROW(read_point_cloud(file("c.xyz", "1 2 zz\n")), ParseError);
  EXPECT_THROW(read_point_cloud(file("d.ply", "ply\nformat binary_little_endian 1.0\nend_header\n")),
               ParseError);
  EXPECT_THROW(read_point_cloud(file("e.ply", "ply\nformat ascii 1.0\nelement vertex 3\n"
                                              "property float x\nproperty float y\nproperty float z\n"
                                              "end_header\n1 2 3\n")),
               ParseError);
  EXPECT_THROW(read_point_cloud(file("f.ply", "ply\nformat ascii 1.0\nelement vertex 1\n"
                                              "property float x\nproperty float y\nend_header\n1 2\n")),
               ParseError);
  EXPECT_THROW(read_point_cloud(file("g.ply", "not a ply\n")), ParseError);
}

TEST_F(PointCloudIo, FormatFromPath) {
  EXPECT_EQ(format_from_path("a.xyz"), CloudFormat::Xyz);
  EXPECT_EQ(format_from_path("a.txt"), CloudFormat::Xyz);
  EXPECT_EQ(format_from_path("a.ply"), CloudFormat::Ply);
  EXPECT_EQ(format_from_path("a.csv"), CloudFormat::Csv);
  EXPECT_THROW(format_from_path("a.pcd"), ParseError);
}

using TransformIo = TempDir;

TEST_F(TransformIo, ParseRowMajorThenTranslation) {
  const RigidTransform t = parse_transform("0 -1 0\n1 0 0\n0 0 1\n0.5 -2 3\n");
  EXPECT_EQ(t.rotation, kentreg::testing::rot_z(std::numbers::pi / 2).unaryExpr([](double x) {
    return std::round(x);
  }));
  EXPECT_EQ(t.translation, Vec3(0.5, -2, 3));
}

TEST_F(TransformIo, WrongCountOrBadToken) {
  EXPECT_THROW(parse_transform("1 0 0 0 1 0 0 0 1 0 0"), ParseError);
  EXPECT_THROW(parse_transform("1 0 0 0 1 0 0 0 1 0 0 0 0"), ParseError);
  EXPECT_THROW(parse_transform("1 0 0 0 1 0 0 0 1 0 0 x"), ParseError);
}

TEST_F(TransformIo, RoundTripIsExact) {
  std::mt19937_64 rng(1);
  RigidTransform t;
  t.rotation = kentreg::testing::random_rotation(rng);
  t.translation = Vec3(0.1, 1.0 / 3.0, -7e-9);
  const fs::path p = dir_ / "gt.txt";
  write_transform(p, t);
  const RigidTransform back = read_transform(p);
  EXPECT_EQ(back.rotation, t.rotation);
  EXPECT_EQ(back.translation, t.translation);
  EXPECT_THROW(read_transform(dir_ / "missing.txt"), FileNotFound);
}

TEST(SceneConfigParse, AllDirectives) {
  const SceneConfig c = parse_scene_config(
      "# two walls\n"
      "plane 2 0 0 1.5 3 1000   # normalized on read\n"
      "plane 0 0 1 -1 4 500\n"
      "noise_sigma 0.01\n"
      "outlier_fraction 0.2\n"
      "outlier_box -1 -2 -3 1 2 3\n"
      "seed 42\n"
      "max_rotation_deg 30\n"
      "max_translation 0.25\n");
  ASSERT_EQ(c.scene.planes.size(), 2u);
  EXPECT_EQ(c.scene.planes[0].normal, Vec3::UnitX());
  EXPECT_EQ(c.scene.planes[0].offset, 1.5);
  EXPECT_EQ(c.scene.planes[0].extent, 3.0);
  EXPECT_EQ(c.scene.planes[1].point_count, 500);
  EXPECT_EQ(c.scene.noise_sigma, 0.01);
  EXPECT_EQ(c.scene.outlier_fraction, 0.2);
  ASSERT_TRUE(c.scene.outlier_box.has_value());
  EXPECT_EQ(c.scene.outlier_box->min(), Vec3(-1, -2, -3));
  EXPECT_EQ(c.scene.seed, 42u);
  EXPECT_NEAR(c.max_rotation, std::numbers::pi / 6, 1e-15);
  EXPECT_EQ(c.max_translation, 0.25);
  EXPECT_FALSE(c.transform.has_value());

  const RigidTransform a = c.ground_truth(3), b = c.ground_truth(3);
  EXPECT_EQ(a.rotation, b.rotation);
  EXPECT_LE(rotation_error<double>(Mat3::Identity(), a.rotation), std::numbers::pi / 6 + 1e-12);
  EXPECT_LE(a.translation.norm(), 0.25 + 1e-12);
}

TEST(SceneConfigParse, FixedTransformWins) {
  const SceneConfig c = parse_scene_config(
      "plane 1 0 0 0 1 10\nplane 0 1 0 0 1 10\ntransform 1 0 0 0 1 0 0 0 1 0.5 0 0\n");
  ASSERT_TRUE(c.transform.has_value());
  EXPECT_EQ(c.ground_truth(99).translation, Vec3(0.5, 0, 0));
}

TEST(SceneConfigParse, Errors) {
  const std::string planes = "plane 1 0 0 0 1 10\nplane 0 1 0 0 1 10\n";
  EXPECT_THROW(parse_scene_config(planes + "plane 1 0 0\n"), ParseError);
  EXPECT_THROW(parse_scene_config(planes + "noise_sigma abc\n"), ParseError);
  EXPECT_THROW(parse_scene_config(planes + "colour red\n"), ParseError);
  EXPECT_THROW(parse_scene_config(planes + "plane 0 0 0 0 1 10\n"), ParseError);
  EXPECT_THROW(parse_scene_config("plane 1 0 0 0 1 10\n"), ParseError);
  EXPECT_THROW(parse_scene_config(planes + "outlier_fraction 1\n"), ParseError);
  EXPECT_THROW(read_scene_config("/nonexistent/scene.cfg"), FileNotFound);
}

namespace {

RunReport sample_report() {
  std::mt19937_64 rng(5);
  RunReport r;
  r.transform.rotation = kentreg::testing::random_rotation(rng);
  r.transform.translation = Vec3(0.1, -0.2, 1.0 / 3.0);
  r.e_R = 1.234e-3;
  r.e_t = 5e-7;
  r.q_trace = {-10.5, -3.25, -3.0000000000000004};
  ClusterDiagnostics d;
  d.model_cluster = 1;
  d.observed_cluster = 0;
  d.model_normals = 1234;
  d.observed_normals = 1200;
  d.kappa = 812.5;
  d.beta = 17.125;
  d.iterations = 9;
  d.rotation = kentreg::testing::random_rotation(rng);
  r.clusters = {d, ClusterDiagnostics{}};
  r.converged = true;
  r.rounds = 4;
  r.timings_ms = {{"register", 12.5}, {"load", 0.75}};
  r.config = {{"clusters", "2"}, {"pi0", "0.1"}};
  return r;
}

}  // namespace

TEST(Report, JsonRoundTripIsExact) {
  const RunReport r = sample_report();
  EXPECT_TRUE(report_from_json(to_json(r)) == r);
  EXPECT_TRUE(report_from_json(to_json(r, -1)) == r);
}

TEST(Report, OptionalErrorsOmittedWithoutTruth) {
  RunReport r = sample_report();
  r.e_R.reset();
  r.e_t.reset();
  const RunReport back = report_from_json(to_json(r));
  EXPECT_FALSE(back.e_R.has_value());
  EXPECT_FALSE(back.e_t.has_value());
  EXPECT_TRUE(back == r);
}

TEST(Report, EqualityNoticesChanges) {
  const RunReport r = sample_report();
  RunReport s = r;
  s.q_trace.back() += 1e-12;
  EXPECT_FALSE(s == r);
  s = r;
  s.clusters[0].kappa = 0;
  EXPECT_FALSE(s == r);
}

TEST(Report, MalformedJson) {
  EXPECT_THROW(report_from_json("{"), ParseError);
  EXPECT_THROW(report_from_json("[]"), ParseError);
  EXPECT_THROW(report_from_json("{\"converged\": true}"), ParseError);
}
