#include "cvp/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cvp {

Grid2D::Grid2D(int height, int width) : height_(height), width_(width) {
  if (height < 8 || width < 8) {
    throw std::invalid_argument("grid must be at least 8x8, got " + std::to_string(height) + "x" +
                                std::to_string(width));
  }
}

ScalarField::ScalarField(Grid2D grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(Grid2D grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("field size does not match grid");
}

bool ScalarField::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

LabelStack::LabelStack(Grid2D grid, int channels)
    : grid_(grid), channels_(channels), values_(grid.size() * channels, 0.0) {
  if (channels < 2) throw std::invalid_argument("label stack needs at least 2 channels");
  auto bg = channel(0);
  std::fill(bg.begin(), bg.end(), 1.0);
}

LabelStack::LabelStack(Grid2D grid, int channels, std::vector<double> values)
    : grid_(grid), channels_(channels), values_(std::move(values)) {
  if (channels < 2) throw std::invalid_argument("label stack needs at least 2 channels");
  if (values_.size() != grid_.size() * channels) throw std::invalid_argument("stack size does not match grid");
}

ScalarField LabelStack::channel_field(int c) const {
  auto ch = channel(c);
  return ScalarField(grid_, std::vector<double>(ch.begin(), ch.end()));
}

void LabelStack::set_channel(int c, const ScalarField& f) {
  if (!(f.grid() == grid_)) throw std::invalid_argument("channel grid mismatch");
  auto src = f.values();
  std::copy(src.begin(), src.end(), channel(c).begin());
}

bool LabelStack::on_simplex(double tol) const {
  const std::size_t n = pixels();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int c = 0; c < channels_; ++c) {
      const double v = at(c, i);
      if (!(v >= -tol && v <= 1.0 + tol)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

bool LabelStack::is_binary() const {
  for (double v : values_) {
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

std::vector<int> LabelStack::argmax() const {
  const std::size_t n = pixels();
  std::vector<int> labels(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = at(0, i);
    for (int c = 1; c < channels_; ++c) {
      if (at(c, i) > best) {
        best = at(c, i);
        labels[i] = c;
      }
    }
  }
  return labels;
}

LabelStack LabelStack::from_labels(Grid2D grid, int channels, std::span<const int> labels) {
  if (labels.size() != grid.size()) throw std::invalid_argument("label image size does not match grid");
  LabelStack u(grid, channels, std::vector<double>(grid.size() * channels, 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= channels) throw std::invalid_argument("label out of range");
    u.at(labels[i], i) = 1.0;
  }
  return u;
}

Image::Image(Grid2D grid, int channels, std::vector<double> values)
    : grid_(grid), channels_(channels), values_(std::move(values)) {
  if (channels != 1 && channels != 3) throw std::invalid_argument("image must have 1 or 3 channels");
  if (values_.size() != grid_.size() * channels) throw std::invalid_argument("image size does not match grid");
}

double Image::difference(std::size_t a, std::size_t b) const {
  if (channels_ == 1) return std::abs(values_[a] - values_[b]);
  double acc = 0.0;
  for (int c = 0; c < channels_; ++c) {
    const double d = values_[a * channels_ + c] - values_[b * channels_ + c];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace cvp
