#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "cvp/fixtures.hpp"
#include "cvp/imageio.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CVP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cvp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Writes the 128-px square fixture and returns (image, scribbles) paths.
  std::pair<std::string, std::string> write_square(bool drop_background = false) {
    auto sq = cvp::fixtures::square_case(128);
    const auto& g = sq.image.grid();
    std::vector<std::uint8_t> img(g.size()), scr(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) img[i] = static_cast<std::uint8_t>(std::lround(sq.image.values()[i] * 255));
    for (int c = 0; c < 2; ++c) {
      if (c == 0 && drop_background) continue;
      for (auto p : sq.scribbles.pixels(c)) scr[p] = static_cast<std::uint8_t>(c + 1);
    }
    cvp::write_file(dir_ / "image.pgm", cvp::encode_pgm(g, img));
    cvp::write_file(dir_ / "scribbles.pgm", cvp::encode_pgm(g, scr));
    return {(dir_ / "image.pgm").string(), (dir_ / "scribbles.pgm").string()};
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(cvp::read_file(p)); }

}  // namespace

TEST_F(Cli, SegmentWritesOutputs) {
  auto [img, scr] = write_square();
  ASSERT_EQ(run("segment --image " + img + " --scribbles " + scr + " --classes 2 --out-dir " + path("out")), 0);
  for (const char* f : {"labels.pgm", "mask_1.pgm", "log.csv", "report.json", "timing.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  auto rep = read_json(dir_ / "out" / "report.json");
  EXPECT_EQ(rep["task"], "segment");
  EXPECT_TRUE(rep["converged"].get<bool>());
  EXPECT_TRUE(read_json(dir_ / "out" / "timing.json").contains("wall_seconds"));
  auto mask = cvp::read_mask(dir_ / "out" / "mask_1.pgm");
  EXPECT_LE(cvp::shape_distance(mask, cvp::fixtures::square_case(128).truth_mask(1)), 0.01);
}

TEST_F(Cli, MissingClassExitCode) {
  auto [img, scr] = write_square(true);
  EXPECT_EQ(run("segment --image " + img + " --scribbles " + scr + " --classes 2 --out-dir " + path("out")), 3);
}

TEST_F(Cli, InputErrorsExitTwo) {
  auto [img, scr] = write_square();
  EXPECT_EQ(run("segment --image " + path("nope.pgm") + " --scribbles " + scr + " --out-dir " + path("o")), 2);
  cvp::write_file(dir_ / "junk.pgm", "not an image");
  EXPECT_EQ(run("segment --image " + path("junk.pgm") + " --scribbles " + scr + " --out-dir " + path("o")), 2);
  cvp::write_file(dir_ / "empty.csv", "");
  EXPECT_EQ(run("hull --points " + path("empty.csv") + " --out-dir " + path("o")), 2);
  EXPECT_EQ(run("segment --image " + img), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, ValidationErrorsExitThree) {
  auto [img, scr] = write_square();
  EXPECT_EQ(run("segment --image " + img + " --scribbles " + scr + " --tau 1.7 --out-dir " + path("o")), 3);
  EXPECT_EQ(run("segment --image " + img + " --scribbles " + scr + " --alpha fast --out-dir " + path("o")), 3);
  cvp::write_file(dir_ / "bad.cfg", "unknown_key = 1\n");
  EXPECT_EQ(run("segment --image " + img + " --scribbles " + scr + " --config " + path("bad.cfg") + " --out-dir " +
                path("o")),
            3);
}

TEST_F(Cli, IterationCapExitFiveWithOutputs) {
  auto [img, scr] = write_square();
  EXPECT_EQ(run("segment --image " + img + " --scribbles " + scr + " --max-outer 2 --out-dir " + path("cap")), 5);
  EXPECT_TRUE(fs::exists(dir_ / "cap" / "report.json"));
  EXPECT_TRUE(read_json(dir_ / "cap" / "report.json")["hit_outer_cap"].get<bool>());
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  auto [img, scr] = write_square();
  cvp::write_file(dir_ / "run.cfg", "lambda = 3\nmu = 2\nmax_outer = 2\n");
  run("segment --image " + img + " --scribbles " + scr + " --config " + path("run.cfg") + " --mu 1.5 --out-dir " +
      path("o"));
  auto cfg = read_json(dir_ / "o" / "report.json")["config"];
  EXPECT_EQ(cfg["lambda"], "3");
  EXPECT_EQ(cfg["mu"], "1.5");
  EXPECT_EQ(cfg["max_outer"], "2");
}

TEST_F(Cli, RadiiOverride) {
  auto [img, scr] = write_square();
  run("segment --image " + img + " --scribbles " + scr + " --radii 1,4,7,10,13 --max-outer 3 --out-dir " + path("o"));
  EXPECT_EQ(read_json(dir_ / "o" / "report.json")["config"]["radii"], "1,4,7,10,13");
}

TEST_F(Cli, HullWritesPolygons) {
  cvp::Grid2D g(64, 64);
  auto pts = cvp::fixtures::convex_point_set(g, 30, 2);
  std::string csv = "x,y\n";
  for (const auto& p : pts.points) csv += std::to_string(p.x) + "," + std::to_string(p.y) + "\n";
  cvp::write_file(dir_ / "pts.csv", csv);
  const int code = run("hull --points " + path("pts.csv") + " --width 64 --height 64 --max-outer 300 --out-dir " +
                       path("h"));
  EXPECT_TRUE(code == 0 || code == 5) << code;
  for (const char* f : {"mask.pgm", "polygon.csv", "quickhull.csv", "report.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "h" / f)) << f;
  }
  auto qh = cvp::read_points_csv(dir_ / "h" / "quickhull.csv");
  EXPECT_GE(qh.points.size(), 3u);
  EXPECT_TRUE(read_json(dir_ / "h" / "report.json").contains("sdist_vs_quickhull"));
}

TEST_F(Cli, EvalCases) {
  cvp::Grid2D g(80, 80);
  cvp::write_file(dir_ / "a.pgm", cvp::encode_mask(cvp::fixtures::disc_mask(g, {35, 40}, 20)));
  cvp::write_file(dir_ / "b.pgm", cvp::encode_mask(cvp::fixtures::disc_mask(g, {40, 40}, 20)));
  cvp::write_file(dir_ / "e.pgm", cvp::encode_mask(cvp::RegionMask(g)));
  EXPECT_EQ(run("eval " + path("a.pgm") + " " + path("a.pgm") + " --out-dir " + path("same")), 0);
  EXPECT_EQ(read_json(dir_ / "same" / "eval.json")["sdist"].get<double>(), 0.0);
  EXPECT_EQ(run("eval " + path("a.pgm") + " " + path("b.pgm") + " --out-dir " + path("shift")), 0);
  const double v = read_json(dir_ / "shift" / "eval.json")["sdist"].get<double>();
  EXPECT_DOUBLE_EQ(v, cvp::shape_distance(cvp::read_mask(dir_ / "a.pgm"), cvp::read_mask(dir_ / "b.pgm")));
  EXPECT_EQ(run("eval " + path("a.pgm") + " " + path("e.pgm")), 3);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  auto [img, scr] = write_square();
  ASSERT_EQ(run("segment --image " + img + " --scribbles " + scr + " --seed 4 --out-dir " + path("r1")), 0);
  ASSERT_EQ(run("segment --image " + img + " --scribbles " + scr + " --seed 4 --out-dir " + path("r2")), 0);
  for (const char* f : {"labels.pgm", "mask_1.pgm", "log.csv", "report.json"}) {
    EXPECT_EQ(cvp::read_file(dir_ / "r1" / f), cvp::read_file(dir_ / "r2" / f)) << f;
  }
}
