#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace cvp {

/// Pixel grid, at least 8x8. Row-major, (row, col) = (y, x). The longest side
/// maps to normalized length 1.
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return static_cast<std::size_t>(height_) * width_; }
  int longest_side() const { return height_ > width_ ? height_ : width_; }

  std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * width_ + x; }
  bool contains(int y, int x) const { return y >= 0 && y < height_ && x >= 0 && x < width_; }

  /// Normalized coordinate of a pixel center.
  double normalized(int i) const { return (i + 0.5) / longest_side(); }

  bool operator==(const Grid2D&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Grid2D grid, double fill = 0.0);
  ScalarField(Grid2D grid, std::vector<double> values);

  const Grid2D& grid() const { return grid_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator()(int y, int x) { return values_[grid_.index(y, x)]; }
  double operator()(int y, int x) const { return values_[grid_.index(y, x)]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool all_finite() const;

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

/// Relaxed indicator stack u = (u_0, ..., u_P). Channel 0 is background.
/// Storage is channel-major: channel c occupies [c * N, (c + 1) * N).
class LabelStack {
 public:
  LabelStack() = default;
  /// All pixels background.
  LabelStack(Grid2D grid, int channels);
  LabelStack(Grid2D grid, int channels, std::vector<double> values);

  const Grid2D& grid() const { return grid_; }
  int channels() const { return channels_; }
  int classes() const { return channels_ - 1; }
  std::size_t pixels() const { return grid_.size(); }

  std::span<double> channel(int c) { return {values_.data() + c * pixels(), pixels()}; }
  std::span<const double> channel(int c) const { return {values_.data() + c * pixels(), pixels()}; }
  double& at(int c, std::size_t i) { return values_[c * pixels() + i]; }
  double at(int c, std::size_t i) const { return values_[c * pixels() + i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  ScalarField channel_field(int c) const;
  void set_channel(int c, const ScalarField& f);

  /// Every value in [0,1] and every pixel sums to 1 within tol.
  bool on_simplex(double tol = 1e-9) const;
  bool is_binary() const;

  /// Argmax label per pixel, lowest index wins ties.
  std::vector<int> argmax() const;

  /// One-hot stack from a label image.
  static LabelStack from_labels(Grid2D grid, int channels, std::span<const int> labels);

 private:
  Grid2D grid_;
  int channels_ = 0;
  std::vector<double> values_;
};

/// Image with intensities scaled to [0,1]; 1 (gray) or 3 (color) channels,
/// interleaved per pixel.
class Image {
 public:
  Image() = default;
  Image(Grid2D grid, int channels, std::vector<double> values);

  const Grid2D& grid() const { return grid_; }
  int channels() const { return channels_; }
  std::span<const double> pixel(std::size_t i) const { return {values_.data() + i * channels_, static_cast<std::size_t>(channels_)}; }
  std::span<const double> values() const { return values_; }

  /// |I(a) - I(b)|: absolute difference for gray, Euclidean norm for color.
  double difference(std::size_t a, std::size_t b) const;

 private:
  Grid2D grid_;
  int channels_ = 1;
  std::vector<double> values_;
};

}  // namespace cvp
