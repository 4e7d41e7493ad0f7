#pragma once

// Disc and Gaussian kernels and the convolution kernels built on them.
//
// Every convolution has two implementations:
//   cvp::reference  direct sum over taps, serial. Test oracle.
//   cvp (default)   row-span / prefix-sum formulation, OpenMP over rows.
// Both compute out(x) = sum_taps w * in_padded(x - offset), where reads outside
// the grid return the pad value. The parallel path is bitwise identical for
// any thread count since each output pixel is reduced by one thread in a
// fixed order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cvp/field.hpp"

namespace cvp {

struct Tap {
  int dy;
  int dx;
  double weight;
};

/// Uniform disc kernel: all integer offsets with |offset| <= radius, equal
/// weights summing to 1.
class RadialKernel {
 public:
  int radius() const { return radius_; }
  const std::vector<Tap>& taps() const { return taps_; }
  double weight() const { return weight_; }
  /// Half-width of the row at vertical offset dy in [-radius, radius].
  int half_width(int dy) const { return half_widths_[dy + radius_]; }

 private:
  friend RadialKernel make_disc_kernel(int radius);
  int radius_ = 0;
  double weight_ = 0.0;
  std::vector<Tap> taps_;
  std::vector<int> half_widths_;
};

/// Throws std::invalid_argument for radius < 1.
RadialKernel make_disc_kernel(int radius);

/// Isotropic Gaussian, sigma given in normalized domain units (longest grid
/// side = 1). Truncated to the disc of radius 3*sigma_px and renormalized.
class GaussianKernel {
 public:
  double sigma_norm() const { return sigma_norm_; }
  double sigma_px() const { return sigma_px_; }
  int reach() const { return reach_; }
  const std::vector<Tap>& taps() const { return taps_; }
  /// 1D profile exp(-d^2 / 2 sigma_px^2), d in [-reach, reach], unnormalized.
  std::span<const double> profile() const { return profile_; }
  int half_width(int dy) const { return half_widths_[dy + reach_]; }
  /// Weight normalization: tap weight = profile(dy) * profile(dx) / norm.
  double norm() const { return norm_; }

 private:
  friend GaussianKernel make_gaussian_kernel(double sigma_norm, const Grid2D& grid);
  double sigma_norm_ = 0.0;
  double sigma_px_ = 0.0;
  int reach_ = 0;
  double norm_ = 1.0;
  std::vector<double> profile_;
  std::vector<Tap> taps_;
  std::vector<int> half_widths_;
};

GaussianKernel make_gaussian_kernel(double sigma_norm, const Grid2D& grid);

/// Multi-channel real field with no simplex constraint (convolution outputs,
/// data terms, stacked constraint blocks). Channel-major storage.
class MultiField {
 public:
  MultiField() = default;
  MultiField(Grid2D grid, int channels, double fill = 0.0)
      : grid_(grid), channels_(channels), values_(grid.size() * channels, fill) {}

  const Grid2D& grid() const { return grid_; }
  int channels() const { return channels_; }
  std::size_t pixels() const { return grid_.size(); }
  std::span<double> channel(int c) { return {values_.data() + c * pixels(), pixels()}; }
  std::span<const double> channel(int c) const { return {values_.data() + c * pixels(), pixels()}; }
  double& at(int c, std::size_t i) { return values_[c * pixels() + i]; }
  double at(int c, std::size_t i) const { return values_[c * pixels() + i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

 private:
  Grid2D grid_;
  int channels_ = 0;
  std::vector<double> values_;
};

// ---- raw-buffer kernels used by the solver hot loops ----

/// Row prefix sums of (in - pad): prefix[y * (W + 1) + x] = sum_{x' < x}.
void row_prefix_sums(std::span<const double> in, const Grid2D& grid, double pad, std::span<double> prefix);

/// Disc convolution over the whole grid from precomputed row prefix sums of
/// (in - pad). Adds pad back at the end.
void disc_from_prefix(std::span<const double> prefix, const Grid2D& grid, const RadialKernel& k, double pad,
                      std::span<double> out);

/// Disc convolution evaluated only at the listed pixel indices; out is full
/// size, other entries untouched.
void disc_from_prefix_at(std::span<const double> prefix, const Grid2D& grid, const RadialKernel& k, double pad,
                         std::span<const std::uint32_t> pixels, std::span<double> out);

void disc_convolve(std::span<const double> in, const Grid2D& grid, const RadialKernel& k, double pad,
                   std::span<double> out);

void gaussian_convolve(std::span<const double> in, const Grid2D& grid, const GaussianKernel& k, double pad,
                       std::span<double> out);

// ---- field-level operations ----

ScalarField convolve_scalar(const ScalarField& field, const RadialKernel& k, double pad);
ScalarField convolve_scalar(const ScalarField& field, const GaussianKernel& k, double pad);

/// Channel 0 of the result is identically zero; channel i >= 1 is the disc
/// convolution of u_i padded with 0.
MultiField convolve_stack(const LabelStack& u, const RadialKernel& k);

namespace reference {

void convolve_direct(std::span<const double> in, const Grid2D& grid, std::span<const Tap> taps, double pad,
                     std::span<double> out);

ScalarField convolve_scalar(const ScalarField& field, const RadialKernel& k, double pad);
ScalarField convolve_scalar(const ScalarField& field, const GaussianKernel& k, double pad);
MultiField convolve_stack(const LabelStack& u, const RadialKernel& k);

}  // namespace reference

/// Number of OpenMP threads the parallel kernels use (1 without OpenMP).
int kernel_threads();
void set_kernel_threads(int n);

}  // namespace cvp
