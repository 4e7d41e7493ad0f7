#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cvp/field.hpp"
#include "cvp/geometry.hpp"
#include "cvp/kernels.hpp"

namespace cvp {

/// Labeled pixels R_0..R_P. A pixel belongs to at most one class.
class ScribbleSet {
 public:
  ScribbleSet() = default;
  ScribbleSet(Grid2D grid, int classes);

  /// Scribble label image: value n in 1..classes means class n-1, 0 unlabeled.
  static ScribbleSet from_label_image(Grid2D grid, std::span<const int> labels, int classes);

  const Grid2D& grid() const { return grid_; }
  int classes() const { return static_cast<int>(pixels_.size()); }
  const std::vector<std::uint32_t>& pixels(int cls) const { return pixels_[cls]; }
  /// Class of a pixel or -1.
  int label_at(std::size_t i) const { return owner_[i]; }

  /// Adds a pixel; returns false if it is already owned by another class.
  /// Re-adding a pixel to its own class is a no-op that returns true.
  bool add(int cls, std::uint32_t pixel);

  /// Throws MissingScribbles for the first empty class.
  void require_all_classes() const;
  std::size_t total() const;

  /// At most `limit` pixels per class, chosen uniformly without replacement
  /// from a generator seeded with `seed`. Sets already within the limit are
  /// returned unchanged.
  ScribbleSet subsample(std::size_t limit, std::uint64_t seed) const;

 private:
  Grid2D grid_;
  std::vector<std::vector<std::uint32_t>> pixels_;
  std::vector<int> owner_;
};

/// d_i(x): sum over y in R_i of |I(y) - I(x)|, plus omega |x - y|^2 for i >= 1,
/// with |x - y| in normalized domain units.
double scribble_distance(std::size_t pixel, int cls, const ScribbleSet& scribbles, const Image& image, double omega);

/// d_i(x) for every pixel and class.
MultiField scribble_distances(const Image& image, const ScribbleSet& scribbles, double omega);

/// Softmax of -d with a max shift: p_i(x) = exp(-d_i) / sum_j exp(-d_j).
MultiField class_probabilities(const Image& image, const ScribbleSet& scribbles, double omega);

/// f_i(x) = -ln p_i(x), clamped to [-ln(1 - 1e-12), -ln(1e-12)]. Evaluated in
/// log space so saturated probabilities keep their ordering up to the clamp.
MultiField similarity_field(const Image& image, const ScribbleSet& scribbles, double omega);

inline constexpr std::size_t kScribbleSampleLimit = 500;
inline constexpr double kProbabilityFloor = 1e-12;

struct PointSet {
  std::vector<Point2> points;
};

/// Nearest-pixel rasterization; duplicate hits collapse. Points must land on the grid.
RegionMask rasterize_points(const PointSet& points, const Grid2D& grid);

/// Linear cost g and pinned pixels of the unified model.
struct Objective {
  MultiField g;
  /// Forced class per pixel, -1 when free.
  std::vector<int> pins;
  double lambda = 0.0;
  double sigma = 0.01;

  int channels() const { return g.channels(); }
  const Grid2D& grid() const { return g.grid(); }
  std::size_t pinned_count() const;
};

struct SegmentInputs {
  const Image* image = nullptr;
  const ScribbleSet* scribbles = nullptr;
  double omega = 0.1;
  double lambda = 2.0;
  double sigma = 0.01;
  std::uint64_t seed = 0;
};

/// g = f from the subsampled scribbles; every scribbled pixel pinned to its class.
Objective assemble_segment_objective(const SegmentInputs& in);

/// P = 1, g = (0, 1), u_1 pinned to 1 on the rasterized set, lambda = 0.
Objective assemble_hull_clean_objective(const PointSet& points, const Grid2D& grid, double sigma = 0.01);

/// P = 1, g = (0, 1 - gamma on the rasterized set), no pins.
Objective assemble_hull_noisy_objective(const PointSet& points, const Grid2D& grid, double gamma, double lambda,
                                        double sigma = 0.01);

/// lambda sqrt(pi / sigma) G_sigma * (1 - 2 u_ref), per channel. The field
/// 1 - 2u is padded with -1 on the background channel and +1 elsewhere.
MultiField length_linear_term(const LabelStack& u_ref, double sigma, double lambda);

/// <g, u> + lambda sqrt(pi / sigma) <u, G_sigma * (1 - u)>.
double objective_value(const LabelStack& u, const MultiField& g, double lambda, double sigma);

/// Boundary-length part only (the lambda-weighted term above).
double boundary_term(const LabelStack& u, double lambda, double sigma);

}  // namespace cvp
