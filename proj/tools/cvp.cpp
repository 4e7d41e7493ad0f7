// cvp: convexity-constrained segmentation and convex hulls from the command line.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cvp/config.hpp"
#include "cvp/errors.hpp"
#include "cvp/fixtures.hpp"
#include "cvp/imageio.hpp"
#include "cvp/kernels.hpp"
#include "cvp/tasks.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Solver flags shared by every solving subcommand, kept as strings so that
// the config parser is the single place that validates them.
struct SolverFlags {
  std::string config_path;
  std::vector<std::pair<std::string, std::optional<std::string>>> values = {
      {"lambda", {}}, {"sigma", {}}, {"theta", {}},        {"belt_radius", {}}, {"omega", {}},
      {"eps", {}},    {"mu", {}},    {"tau", {}},          {"alpha", {}},       {"inner_budget", {}},
      {"max_outer", {}}, {"radii", {}}, {"gamma", {}},     {"seed", {}},
  };
  bool verbose = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "flat key=value config file");
    for (auto& [key, value] : values) {
      std::string flag = "--" + key;
      for (char& c : flag) {
        if (c == '_') c = '-';
      }
      app->add_option(flag, value, key == "radii" ? "comma-separated radii for every outer iteration" : "");
    }
    app->add_flag("-v,--verbose", verbose, "print the iteration log to stderr");
  }

  cvp::RunConfig load() const {
    std::string text;
    if (!config_path.empty()) text = cvp::read_file(config_path);
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& [key, value] : values) {
      if (value) overrides.emplace_back(key, *value);
    }
    return cvp::load_config(text, overrides);
  }
};

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw cvp::InputError("cannot create output directory " + p.string());
  return p;
}

void write_json(const fs::path& path, const json& j) { cvp::write_file(path, j.dump(2) + "\n"); }

json timing_json(double wall, const std::vector<cvp::IterationRecord>& log) {
  json per = json::array();
  for (const auto& r : log) per.push_back(r.wall_seconds);
  return {{"wall_seconds", wall}, {"threads", cvp::kernel_threads()}, {"iteration_wall_seconds", per}};
}

cvp::ProgressFn verbose_progress(bool verbose) {
  if (!verbose) return {};
  return [](const cvp::Progress& p) {
    std::fprintf(stderr, "k=%d objective=%.10g violations=%ld belt=%zu", p.k, p.objective, p.violations, p.belt_size);
    if (p.err) std::fprintf(stderr, " err=%.6g", *p.err);
    std::fputc('\n', stderr);
    return true;
  };
}

int finish(const cvp::SolveState& s) {
  if (s.hit_outer_cap) {
    std::fprintf(stderr, "warning: outer iteration cap reached after %d iterations without convergence\n", s.k);
    return static_cast<int>(cvp::ExitCode::kIterationCap);
  }
  return 0;
}

int cmd_segment(const std::string& image_path, const std::string& scribble_path, int classes,
                const SolverFlags& flags, const std::string& out_dir) {
  const cvp::RunConfig cfg = flags.load();
  const cvp::Image image = cvp::to_image(cvp::read_pnm(image_path));
  const cvp::ScribbleSet scribbles = cvp::to_scribbles(cvp::read_pnm(scribble_path), classes);
  const fs::path out = prepare_out_dir(out_dir);
  const cvp::SegmentResult r = cvp::run_segment(image, scribbles, cfg, verbose_progress(flags.verbose));

  cvp::write_file(out / "labels.pgm", cvp::encode_labels(image.grid(), r.labels));
  for (std::size_t c = 1; c < r.masks.size(); ++c) {
    cvp::write_file(out / ("mask_" + std::to_string(c) + ".pgm"), cvp::encode_mask(r.masks[c]));
  }
  cvp::write_file(out / "log.csv", cvp::iteration_log_csv(r.log));
  write_json(out / "report.json", r.report);
  write_json(out / "timing.json", timing_json(r.wall_seconds, r.log));
  std::printf("segment: %d outer iterations, converged=%s, report %s\n", r.state.k,
              r.state.converged ? "true" : "false", (out / "report.json").string().c_str());
  return finish(r.state);
}

int cmd_hull(const std::string& points_path, int width, int height, bool noisy, const SolverFlags& flags,
             const std::string& out_dir) {
  const cvp::RunConfig cfg = flags.load();
  const cvp::PointSet points = cvp::read_points_csv(points_path);
  if (width < 8 || height < 8) throw cvp::ValidationError("grid must be at least 8x8");
  const cvp::Grid2D grid(height, width);
  const fs::path out = prepare_out_dir(out_dir);
  const cvp::HullResult r = cvp::run_hull(points, grid, cfg, noisy, verbose_progress(flags.verbose));

  cvp::write_file(out / "mask.pgm", cvp::encode_mask(r.mask));
  cvp::write_file(out / "polygon.csv", cvp::encode_polygon_csv(r.polygon));
  cvp::write_file(out / "quickhull.csv", cvp::encode_polygon_csv(r.quickhull));
  cvp::write_file(out / "log.csv", cvp::iteration_log_csv(r.log));
  write_json(out / "report.json", r.report);
  write_json(out / "timing.json", timing_json(r.wall_seconds, r.log));
  std::printf("hull: area %zu, S-dist vs quickhull %s, %zu points excluded\n", r.mask.area(),
              r.report["sdist_vs_quickhull"].dump().c_str(), r.excluded.size());
  return finish(r.state);
}

int cmd_ring(const std::string& image_path, const std::string& inner_path, const std::string& ring_path,
             const SolverFlags& flags, const std::string& out_dir) {
  const cvp::RunConfig cfg = flags.load();
  const cvp::Image image = cvp::to_image(cvp::read_pnm(image_path));
  const cvp::ScribbleSet inner = cvp::to_scribbles(cvp::read_pnm(inner_path), 2);
  const cvp::ScribbleSet ring = cvp::to_scribbles(cvp::read_pnm(ring_path), 2);
  const fs::path out = prepare_out_dir(out_dir);
  const cvp::RingResult r = cvp::run_ring(image, inner, ring, cfg);

  cvp::write_file(out / "hole.pgm", cvp::encode_mask(r.hole));
  cvp::write_file(out / "disc.pgm", cvp::encode_mask(r.disc));
  cvp::write_file(out / "ring.pgm", cvp::encode_mask(r.ring));
  write_json(out / "report.json", r.report);
  write_json(out / "timing.json", {{"pass1", timing_json(r.inner.wall_seconds, r.inner.log)},
                                   {"pass2", timing_json(r.outer.wall_seconds, r.outer.log)}});
  std::printf("ring: hole %zu px (convex=%s), disc %zu px (convex=%s), ring %zu px\n", r.hole.area(),
              r.hole_convex ? "true" : "false", r.disc.area(), r.disc_convex ? "true" : "false", r.ring.area());
  if (r.inner.state.hit_outer_cap || r.outer.state.hit_outer_cap) return finish(r.inner.state.hit_outer_cap ? r.inner.state : r.outer.state);
  return 0;
}

int cmd_eval(const std::string& a, const std::string& b, const std::string& out_dir) {
  const json rep = cvp::eval_report(cvp::read_mask(a), cvp::read_mask(b));
  std::cout << rep.dump(2) << "\n";
  if (!out_dir.empty()) write_json(prepare_out_dir(out_dir) / "eval.json", rep);
  return 0;
}

int cmd_bench(const SolverFlags& flags, const std::string& out_dir, int size) {
  const cvp::RunConfig cfg = flags.load();
  json rows = json::array();
  auto record = [&rows](const std::string& name, double wall, const cvp::SolveState& s, double sdist) {
    rows.push_back({{"case", name},
                    {"wall_seconds", wall},
                    {"outer_iterations", s.k},
                    {"converged", s.converged},
                    {"sdist", sdist}});
    std::printf("%-14s %8.2f s  k=%-5d converged=%d  S-dist=%.4f\n", name.c_str(), wall, s.k, s.converged, sdist);
    std::fflush(stdout);
  };
  auto segment_case = [&](const cvp::fixtures::SegmentationCase& c) {
    const cvp::SegmentResult r = cvp::run_segment(c.image, c.scribbles, cfg);
    double worst = 0.0;
    for (int cls = 1; cls < c.channels; ++cls) {
      const auto truth = c.truth_mask(cls);
      worst = r.masks[cls].empty() ? 1.0 : std::max(worst, cvp::shape_distance(r.masks[cls], truth));
    }
    record(c.name, r.wall_seconds, r.state, worst);
  };
  segment_case(cvp::fixtures::square_case(size));
  for (int i = 0; i < cvp::fixtures::kOccludedCases; ++i) segment_case(cvp::fixtures::occluded_case(i, size));
  const cvp::Grid2D hull_grid(2 * size, 2 * size);
  const cvp::PointSet pts = cvp::fixtures::convex_point_set(hull_grid, 200, 1);
  const cvp::HullResult h = cvp::run_hull(pts, hull_grid, cfg, false);
  record("hull_clean", h.wall_seconds, h.state, std::isfinite(h.sdist) ? h.sdist : 1.0);

  const json rep = {{"schema_version", cvp::kReportSchemaVersion},
                    {"task", "bench"},
                    {"threads", cvp::kernel_threads()},
                    {"config", cvp::config_json(cfg)},
                    {"cases", rows}};
  if (!out_dir.empty()) write_json(prepare_out_dir(out_dir) / "bench.json", rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convexity-constrained multiphase segmentation and convex hulls"};
  app.require_subcommand(1);
  std::string out_dir;

  SolverFlags seg_flags, hull_flags, ring_flags, bench_flags;
  std::string image, scribbles, points, inner, ring, mask_a, mask_b;
  int classes = 0, width = 256, height = 256, bench_size = 128;
  bool noisy = false;

  CLI::App* seg = app.add_subcommand("segment", "segment an image from scribbles");
  seg->add_option("--image", image, "P5/P6 image")->required();
  seg->add_option("--scribbles", scribbles, "P5 scribble image (n = class n-1, 0 = none)")->required();
  seg->add_option("--classes", classes, "number of classes including background (default: largest value)");
  seg->add_option("--out-dir", out_dir, "output directory");
  seg_flags.attach(seg);

  CLI::App* hull = app.add_subcommand("hull", "convex hull of a point set");
  hull->add_option("--points", points, "CSV of x,y pixel coordinates")->required();
  hull->add_option("--width", width, "grid width");
  hull->add_option("--height", height, "grid height");
  hull->add_flag("--noisy", noisy, "outlier-robust model");
  hull->add_option("--out-dir", out_dir, "output directory");
  hull_flags.attach(hull);

  CLI::App* rng = app.add_subcommand("ring", "two-pass convex ring segmentation");
  rng->add_option("--image", image, "P5/P6 image")->required();
  rng->add_option("--inner", inner, "scribbles: 1 = outside the hole, 2 = hole")->required();
  rng->add_option("--ring", ring, "scribbles: 1 = outside the disc, 2 = ring")->required();
  rng->add_option("--out-dir", out_dir, "output directory");
  ring_flags.attach(rng);

  CLI::App* ev = app.add_subcommand("eval", "S-dist of a mask against a reference mask");
  ev->add_option("estimate", mask_a, "estimated mask (P5)")->required();
  ev->add_option("reference", mask_b, "reference mask (P5)")->required();
  ev->add_option("--out-dir", out_dir, "also write eval.json here");

  CLI::App* bench = app.add_subcommand("bench", "solve the synthetic fixture set and report timings");
  bench->add_option("--size", bench_size, "segmentation grid side");
  bench->add_option("--out-dir", out_dir, "write bench.json here");
  bench_flags.attach(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(cvp::ExitCode::kInputError);
  }

  try {
    if (*seg) return cmd_segment(image, scribbles, classes, seg_flags, out_dir);
    if (*hull) return cmd_hull(points, width, height, noisy, hull_flags, out_dir);
    if (*rng) return cmd_ring(image, inner, ring, ring_flags, out_dir);
    if (*ev) return cmd_eval(mask_a, mask_b, out_dir);
    if (*bench) return cmd_bench(bench_flags, out_dir, bench_size);
  } catch (const cvp::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.code());
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(cvp::ExitCode::kValidationError);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
