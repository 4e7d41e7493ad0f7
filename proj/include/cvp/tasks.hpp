#pragma once

// Task runners shared by the command-line tool and the service: segment,
// hull, ring and eval, each producing masks plus a JSON report.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cvp/config.hpp"
#include "cvp/dataterm.hpp"
#include "cvp/geometry.hpp"
#include "cvp/optimizer.hpp"

namespace cvp {

inline constexpr int kReportSchemaVersion = 1;

/// One line of the iteration log.
struct IterationRecord {
  int k = 0;
  double objective = 0.0;
  long violations = 0;
  std::size_t belt = 0;
  std::optional<double> err;
  double wall_seconds = 0.0;
};

struct SegmentResult {
  SolveState state;
  std::vector<int> labels;
  /// masks[c] for c >= 1; masks[0] is the background.
  std::vector<RegionMask> masks;
  std::vector<IterationRecord> log;
  double wall_seconds = 0.0;
  nlohmann::json report;
};

/// `warm_start`, when given, replaces the scribble-hull initialization.
SegmentResult run_segment(const Image& image, const ScribbleSet& scribbles, const RunConfig& config,
                          const ProgressFn& progress = {}, const LabelStack* warm_start = nullptr);

struct HullResult {
  SolveState state;
  RegionMask mask;
  Polygon polygon;     ///< hull of the solved mask's pixel centers
  Polygon quickhull;   ///< of the input points
  RegionMask quickhull_raster;
  double sdist = 0.0;  ///< shape_distance(mask, quickhull_raster)
  /// Indices of input points whose pixel is not in the solved mask.
  std::vector<std::size_t> excluded;
  std::vector<IterationRecord> log;
  double wall_seconds = 0.0;
  nlohmann::json report;
};

HullResult run_hull(const PointSet& points, const Grid2D& grid, const RunConfig& config, bool noisy,
                    const ProgressFn& progress = {});

struct RingResult {
  SegmentResult inner;  ///< pass 1, class 1 = inner background (hole)
  SegmentResult outer;  ///< pass 2, class 1 = ring plus hole
  RegionMask hole;
  RegionMask disc;
  RegionMask ring;
  bool hole_convex = false;
  bool disc_convex = false;
  nlohmann::json report;
};

/// Two passes. Errors from either pass are rethrown with a "pass 1: " or
/// "pass 2: " prefix and the original exit code.
RingResult run_ring(const Image& image, const ScribbleSet& inner, const ScribbleSet& ring, const RunConfig& config);

/// S-dist of `a` against reference `b` with both directed distances.
/// Throws ValidationError on a grid mismatch or an empty mask.
nlohmann::json eval_report(const RegionMask& a, const RegionMask& b);

/// Per-component area, hull area and ratio for each foreground class.
nlohmann::json component_report(const std::vector<RegionMask>& masks);

/// k,objective,violations,belt,err as CSV (no timing column).
std::string iteration_log_csv(const std::vector<IterationRecord>& log);

nlohmann::json config_json(const RunConfig& config);

}  // namespace cvp
