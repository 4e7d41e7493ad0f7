#include "cvp/tasks.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cvp/errors.hpp"

namespace cvp {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Wraps a caller's progress callback and records the iteration log.
ProgressFn logging_progress(std::vector<IterationRecord>& log, Clock::time_point t0, const ProgressFn& inner) {
  return [&log, t0, inner](const Progress& p) {
    log.push_back({p.k, p.objective, p.violations, p.belt_size, p.err, seconds_since(t0)});
    return inner ? inner(p) : true;
  };
}

std::vector<RegionMask> class_masks(const Grid2D& grid, const std::vector<int>& labels, int channels) {
  std::vector<RegionMask> masks(channels, RegionMask(grid));
  for (std::size_t i = 0; i < labels.size(); ++i) masks[labels[i]].bits()[i] = 1;
  return masks;
}

json history_json(const SolveState& s) {
  json j;
  j["outer_iterations"] = s.k;
  j["converged"] = s.converged;
  j["hit_outer_cap"] = s.hit_outer_cap;
  j["objective_history"] = s.objective_history;
  j["violation_history"] = s.violation_history;
  j["belt_history"] = s.belt_history;
  j["err_history"] = s.err_history;
  j["final"] = {{"objective", s.objective_history.empty() ? 0.0 : s.objective_history.back()},
                {"violations", s.violation_history.empty() ? 0 : s.violation_history.back()},
                {"belt", s.belt_history.empty() ? 0 : s.belt_history.back()}};
  return j;
}

json polygon_json(const Polygon& p) {
  json arr = json::array();
  for (const auto& v : p.vertices) arr.push_back({v.x, v.y});
  return arr;
}

void check_classes(int classes) {
  if (classes > kMaxChannels) {
    throw ValidationError("at most " + std::to_string(kMaxChannels - 1) + " foreground classes are supported");
  }
}

SegmentResult solve_segment(const Image& image, const ScribbleSet& scribbles, const RegionMask* pinned_class1,
                            const RunConfig& config, const ProgressFn& progress, const LabelStack* warm_start) {
  config.validate();
  check_classes(scribbles.classes());
  if (!(image.grid() == scribbles.grid())) throw ValidationError("scribbles and image differ in size");
  scribbles.require_all_classes();

  const auto t0 = Clock::now();
  SegmentInputs in;
  in.image = &image;
  in.scribbles = &scribbles;
  in.omega = config.outer.omega;
  in.lambda = config.outer.lambda;
  in.sigma = config.outer.sigma;
  in.seed = config.seed;
  Objective obj = assemble_segment_objective(in);

  LabelStack u0;
  if (warm_start) {
    if (!(warm_start->grid() == image.grid()) || warm_start->channels() != scribbles.classes()) {
      throw ValidationError("warm start does not match the session");
    }
    u0 = *warm_start;
  } else if (pinned_class1) {
    ScribbleSet seeds = scribbles;
    for (std::size_t i = 0; i < pinned_class1->bits().size(); ++i) {
      if ((*pinned_class1)[i]) seeds.add(1, static_cast<std::uint32_t>(i));
    }
    u0 = initialize_segment(seeds);
  } else {
    u0 = initialize_segment(scribbles);
  }
  if (pinned_class1) {
    for (std::size_t i = 0; i < obj.pins.size(); ++i) {
      if ((*pinned_class1)[i] && obj.pins[i] < 0) obj.pins[i] = 1;
    }
  }

  OuterParams outer = config.outer;
  outer.schedule = ScheduleKind::kSegment;
  SegmentResult r;
  r.state = outer_solve(obj, outer, config.admm, u0, logging_progress(r.log, t0, progress));
  r.wall_seconds = seconds_since(t0);
  r.labels = r.state.u.argmax();
  r.masks = class_masks(image.grid(), r.labels, scribbles.classes());

  json& rep = r.report;
  rep["schema_version"] = kReportSchemaVersion;
  rep["task"] = "segment";
  rep["grid"] = {{"height", image.grid().height()}, {"width", image.grid().width()}};
  rep["classes"] = scribbles.classes();
  rep["config"] = config_json(config);
  json counts = json::array();
  for (int c = 0; c < scribbles.classes(); ++c) counts.push_back(scribbles.pixels(c).size());
  rep["scribbles_per_class"] = counts;
  rep["pinned_pixels"] = obj.pinned_count();
  rep["warm_start"] = warm_start != nullptr;
  rep.update(history_json(r.state));
  rep["components"] = component_report(r.masks);
  return r;
}

}  // namespace

json config_json(const RunConfig& config) {
  json j = json::object();
  for (const auto& [k, v] : config.to_map()) j[k] = v;
  return j;
}

json component_report(const std::vector<RegionMask>& masks) {
  json out = json::array();
  for (std::size_t c = 1; c < masks.size(); ++c) {
    json comps = json::array();
    double min_ratio = 1.0;
    for (const auto& m : component_masks(masks[c])) {
      const double ratio = convexity_ratio(m);
      min_ratio = std::min(min_ratio, ratio);
      const auto hull_area = static_cast<std::size_t>(std::llround(static_cast<double>(m.area()) / ratio));
      comps.push_back({{"area", m.area()}, {"hull_area", hull_area}, {"convexity_ratio", ratio}});
    }
    out.push_back({{"class", c},
                   {"area", masks[c].area()},
                   {"component_count", comps.size()},
                   {"min_convexity_ratio", comps.empty() ? json(nullptr) : json(min_ratio)},
                   {"components", comps}});
  }
  return out;
}

SegmentResult run_segment(const Image& image, const ScribbleSet& scribbles, const RunConfig& config,
                          const ProgressFn& progress, const LabelStack* warm_start) {
  return solve_segment(image, scribbles, nullptr, config, progress, warm_start);
}

HullResult run_hull(const PointSet& points, const Grid2D& grid, const RunConfig& config, bool noisy,
                    const ProgressFn& progress) {
  config.validate();
  if (points.points.empty()) throw InputError("point set is empty");
  for (const auto& p : points.points) {
    const long x = std::lround(p.x), y = std::lround(p.y);
    if (!grid.contains(static_cast<int>(y), static_cast<int>(x))) {
      throw ValidationError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") lies outside the grid");
    }
  }
  const auto t0 = Clock::now();
  const Objective obj = noisy ? assemble_hull_noisy_objective(points, grid, config.gamma, config.outer.lambda,
                                                              config.outer.sigma)
                              : assemble_hull_clean_objective(points, grid, config.outer.sigma);
  OuterParams outer = config.outer;
  outer.schedule = ScheduleKind::kHull;

  HullResult r;
  r.state = outer_solve(obj, outer, config.admm, initialize_hull(points, grid), logging_progress(r.log, t0, progress));
  r.wall_seconds = seconds_since(t0);
  const std::vector<int> labels = r.state.u.argmax();
  r.mask = RegionMask(grid);
  for (std::size_t i = 0; i < labels.size(); ++i) r.mask.bits()[i] = labels[i] == 1;
  if (!r.mask.empty()) {
    const auto centers = r.mask.pixel_centers();
    r.polygon = quickhull(centers);
  }
  r.quickhull = quickhull(points.points);
  r.quickhull_raster = rasterize(r.quickhull, grid);
  r.sdist = r.mask.empty() ? std::numeric_limits<double>::infinity() : shape_distance(r.mask, r.quickhull_raster);
  for (std::size_t i = 0; i < points.points.size(); ++i) {
    const auto& p = points.points[i];
    if (!r.mask(static_cast<int>(std::lround(p.y)), static_cast<int>(std::lround(p.x)))) r.excluded.push_back(i);
  }

  json& rep = r.report;
  rep["schema_version"] = kReportSchemaVersion;
  rep["task"] = noisy ? "hull_noisy" : "hull";
  rep["grid"] = {{"height", grid.height()}, {"width", grid.width()}};
  rep["config"] = config_json(config);
  rep["points"] = points.points.size();
  rep.update(history_json(r.state));
  rep["mask_area"] = r.mask.area();
  rep["polygon"] = polygon_json(r.polygon);
  rep["quickhull_polygon"] = polygon_json(r.quickhull);
  rep["quickhull_area"] = r.quickhull_raster.area();
  rep["sdist_vs_quickhull"] = std::isfinite(r.sdist) ? json(r.sdist) : json(nullptr);
  rep["excluded_points"] = r.excluded;
  rep["components"] = component_report({RegionMask(grid), r.mask});
  return r;
}

RingResult run_ring(const Image& image, const ScribbleSet& inner, const ScribbleSet& ring, const RunConfig& config) {
  RingResult r;
  try {
    r.inner = solve_segment(image, inner, nullptr, config, {}, nullptr);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("pass 1: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("pass 1: ") + e.what());
  }
  r.hole = r.inner.masks.at(1);
  if (r.hole.empty()) throw ValidationError("pass 1: inner region is empty");
  try {
    r.outer = solve_segment(image, ring, &r.hole, config, {}, nullptr);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("pass 2: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("pass 2: ") + e.what());
  }
  r.disc = r.outer.masks.at(1);
  r.ring = RegionMask(image.grid());
  for (std::size_t i = 0; i < r.ring.bits().size(); ++i) r.ring.bits()[i] = r.disc[i] && !r.hole[i];
  r.hole_convex = digital_convexity_oracle(r.hole);
  r.disc_convex = !r.disc.empty() && digital_convexity_oracle(r.disc);

  json& rep = r.report;
  rep["schema_version"] = kReportSchemaVersion;
  rep["task"] = "ring";
  rep["grid"] = {{"height", image.grid().height()}, {"width", image.grid().width()}};
  rep["config"] = config_json(config);
  rep["pass1"] = r.inner.report;
  rep["pass2"] = r.outer.report;
  rep["hole_area"] = r.hole.area();
  rep["disc_area"] = r.disc.area();
  rep["ring_area"] = r.ring.area();
  rep["hole_digitally_convex"] = r.hole_convex;
  rep["disc_digitally_convex"] = r.disc_convex;
  return r;
}

json eval_report(const RegionMask& a, const RegionMask& b) {
  if (!(a.grid() == b.grid())) throw ValidationError("masks differ in size");
  if (a.empty() || b.empty()) throw ValidationError("cannot evaluate an empty mask");
  const ShapeDistance d = shape_distance_detail(a, b);
  return {{"schema_version", kReportSchemaVersion},
          {"task", "eval"},
          {"sdist", d.value},
          {"estimate_to_reference_px", d.est_to_ref},
          {"reference_to_estimate_px", d.ref_to_est},
          {"normalizer_px", d.normalizer}};
}

std::string iteration_log_csv(const std::vector<IterationRecord>& log) {
  std::string out = "k,objective,violations,belt,err\n";
  char buf[128];
  for (const auto& r : log) {
    if (r.err) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%ld,%zu,%.17g\n", r.k, r.objective, r.violations, r.belt, *r.err);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%ld,%zu,\n", r.k, r.objective, r.violations, r.belt);
    }
    out += buf;
  }
  return out;
}

}  // namespace cvp
