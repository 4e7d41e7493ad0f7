#pragma once

// Synthetic instances shared by tests, benchmarks and the CLI bench command.

#include <cstdint>
#include <string>
#include <vector>

#include "cvp/dataterm.hpp"
#include "cvp/field.hpp"
#include "cvp/geometry.hpp"

namespace cvp::fixtures {

struct SegmentationCase {
  std::string name;
  Image image;
  ScribbleSet scribbles;
  /// Ground-truth label per pixel, 0 = background.
  std::vector<int> truth;
  int channels = 2;

  RegionMask truth_mask(int cls) const;
};

/// Bright square on a dark background with light noise; one scribble stroke
/// per class.
SegmentationCase square_case(int size = 128, std::uint64_t seed = 1);

/// Convex objects partly covered by background-colored occluders, with noise.
/// Index 0..2 are two-class, 3..4 three-class.
SegmentationCase occluded_case(int index, int size = 128);
inline constexpr int kOccludedCases = 5;

/// Annulus with convex inner and outer boundaries. Class 1 of `inner` marks
/// the hole; class 1 of `outer` marks the ring.
struct RingCase {
  Image image;
  ScribbleSet inner;
  ScribbleSet outer;
  RegionMask hole;
  RegionMask disc;  ///< ring plus hole
};
RingCase ring_case(int size = 128, std::uint64_t seed = 3);

/// Random convex polygon around `center` with circumradius in [0.75, 1] * radius.
Polygon random_convex_polygon(Point2 center, double radius, int vertices, std::uint64_t seed);

/// `count` points drawn uniformly from a random convex polygon inside the grid.
PointSet convex_point_set(const Grid2D& grid, int count, std::uint64_t seed);

/// Adds round(fraction * n) points uniform over the grid.
PointSet with_outliers(const PointSet& clean, const Grid2D& grid, double fraction, std::uint64_t seed);

/// Two discs of diameter `diameter` whose facing edges are `gap` pixels apart,
/// each filled with every pixel center inside.
PointSet two_clusters(const Grid2D& grid, double diameter, double gap);

enum class Regime { kStrictlyConvex, kStronglyNonconvex, kOther };

struct MaskSample {
  std::string name;
  RegionMask mask;
  Regime regime = Regime::kOther;
  /// Smallest width of the shape or of its concavities, in pixels.
  double feature_size = 0.0;
};

/// Discs, rectangles, random convex polygons, L, U, star shapes and annuli.
std::vector<MaskSample> theorem_corpus(const Grid2D& grid, std::uint64_t seed);

RegionMask disc_mask(const Grid2D& grid, Point2 center, double radius);

}  // namespace cvp::fixtures
