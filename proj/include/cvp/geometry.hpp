#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cvp/field.hpp"

namespace cvp {

/// Point in pixel units: x is the column, y the row. Pixel (row, col) has its
/// center at (col, row).
struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Ordered vertex list. Counterclockwise in the (x right, y down) frame means
/// positive signed area computed with the usual shoelace formula.
struct Polygon {
  std::vector<Point2> vertices;

  double area() const;
  double perimeter() const;
};

/// Boolean per pixel.
class RegionMask {
 public:
  RegionMask() = default;
  explicit RegionMask(Grid2D grid) : grid_(grid), bits_(grid.size(), 0) {}
  RegionMask(Grid2D grid, std::vector<std::uint8_t> bits);

  const Grid2D& grid() const { return grid_; }
  bool operator()(int y, int x) const { return bits_[grid_.index(y, x)] != 0; }
  void set(int y, int x, bool v = true) { bits_[grid_.index(y, x)] = v ? 1 : 0; }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  std::span<const std::uint8_t> bits() const { return bits_; }
  std::span<std::uint8_t> bits() { return bits_; }

  std::size_t area() const;
  bool empty() const { return area() == 0; }
  /// Pixel centers of all set pixels, row-major order.
  std::vector<Point2> pixel_centers() const;

  bool operator==(const RegionMask&) const = default;

 private:
  Grid2D grid_;
  std::vector<std::uint8_t> bits_;
};

double cross(const Point2& o, const Point2& a, const Point2& b);

/// Convex hull vertices, counterclockwise (positive shoelace area), starting at
/// the vertex with the lowest (y, x). Collinear and duplicate points dropped.
/// One distinct point gives one vertex, collinear input gives the two extremes.
Polygon quickhull(std::span<const Point2> points);

/// Pixels whose centers lie inside or on the polygon (even-odd rule). One
/// vertex gives its nearest pixel; two vertices give the digital segment.
RegionMask rasterize(const Polygon& poly, const Grid2D& grid);

/// True iff the mask equals the rasterized hull of its own pixel centers.
/// Throws std::invalid_argument on an empty mask.
bool digital_convexity_oracle(const RegionMask& mask);

/// Exact squared Euclidean distance to the nearest set pixel (two-pass
/// separable transform). Pixels with no set pixel anywhere get +inf.
std::vector<double> squared_distance_transform(const RegionMask& mask);

struct ShapeDistance {
  double value = 0.0;          ///< Hausdorff distance / (2 sqrt(area_ref / pi))
  double est_to_ref = 0.0;     ///< max over estimate pixels of distance to reference (px)
  double ref_to_est = 0.0;     ///< max over reference pixels of distance to estimate (px)
  double normalizer = 0.0;     ///< 2 sqrt(area_ref / pi) (px)
};

/// Normalized Hausdorff distance. The second argument is the reference.
ShapeDistance shape_distance_detail(const RegionMask& estimate, const RegionMask& reference);
double shape_distance(const RegionMask& estimate, const RegionMask& reference);

/// 8-connected components, labels 1..n in raster order of first pixel, 0 elsewhere.
std::vector<int> connected_components(const RegionMask& mask, int* count = nullptr);
std::vector<RegionMask> component_masks(const RegionMask& mask);

/// Area of the mask divided by the area of its rasterized hull.
double convexity_ratio(const RegionMask& mask);

}  // namespace cvp
