#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cvp/field.hpp"
#include "cvp/kernels.hpp"

namespace cvp {

/// C_r(u) = (u - 1) * (b_r * u) - (u - 1) / 2, per channel, at one radius.
/// Channel 0 reduces to (1 - u_0) / 2 since the background is never convolved.
struct ConvexityResidual {
  int radius = 0;
  MultiField values;

  double min_foreground() const;
};

ConvexityResidual convexity_residual(const LabelStack& u, int radius);

/// Number of (pixel, channel >= 1, radius) triples with residual < -tol.
long violation_count(const LabelStack& u, std::span<const int> radii, double tol = 1e-6);

/// E * (P + 1) blocks of N pixels. Block order is radius-major, then channel:
/// block(e, c) holds radius slot e, channel c.
class StackedField {
 public:
  StackedField() = default;
  StackedField(int slots, int channels, std::size_t pixels, double fill = 0.0)
      : slots_(slots), channels_(channels), pixels_(pixels), data_(slots * channels * pixels, fill) {}

  int slots() const { return slots_; }
  int channels() const { return channels_; }
  std::size_t pixels() const { return pixels_; }
  std::span<double> block(int e, int c) { return {data_.data() + (e * channels_ + c) * pixels_, pixels_}; }
  std::span<const double> block(int e, int c) const {
    return {data_.data() + (e * channels_ + c) * pixels_, pixels_};
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::size_t size() const { return data_.size(); }

 private:
  int slots_ = 0;
  int channels_ = 0;
  std::size_t pixels_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// kTaylor is the pointwise first-order expansion
///   A_r u = u (b_r * u^k) + (u^k - 1)(b_r * u) - u / 2.
/// kDoubled replaces the product term by its symmetric estimate
///   A_r u = 2 u (b_r * u^k) - u / 2 - b_r * u.
/// Both share c_r = u^k (b_r * u^k) - 1/2 and agree at u = u^k.
enum class LinearizationForm { kTaylor, kDoubled };

/// Linearization of C_r at a reference stack u^k over a list of radii. In the
/// Taylor form C_r(u) = A_r u + 1/2 - u^k (b_r * u^k) + (u - u^k)(b_r * (u - u^k))
/// holds exactly.
class LinearizedConstraint {
 public:
  LinearizedConstraint(const LabelStack& reference, std::vector<int> radii,
                       LinearizationForm form = LinearizationForm::kTaylor);

  const LabelStack& reference() const { return reference_; }
  const std::vector<int>& radii() const { return radii_; }
  const std::vector<RadialKernel>& kernels() const { return kernels_; }
  int slots() const { return static_cast<int>(radii_.size()); }
  int channels() const { return reference_.channels(); }
  std::size_t pixels() const { return reference_.pixels(); }
  const Grid2D& grid() const { return reference_.grid(); }

  /// b_r * u^k for slot e (channel 0 is zero).
  const MultiField& smoothed_reference(int e) const { return smoothed_[e]; }
  const StackedField& offsets() const { return offsets_; }
  LinearizationForm form() const { return form_; }
  /// A_r u = diagonal(e) u + coupling() (b_r * u), channel by channel.
  const MultiField& diagonal(int e) const { return diagonal_[e]; }
  const MultiField& coupling() const { return coupling_; }

  StackedField make_stacked(double fill = 0.0) const {
    return StackedField(slots(), channels(), pixels(), fill);
  }

  /// out = A_k u. `u` is a channel-major (P+1) x N buffer.
  void apply(std::span<const double> u, StackedField& out) const;
  /// out = A_k^T y.
  void apply_adjoint(const StackedField& y, std::span<double> out) const;

  /// C_r(u^k) for every slot, from the cached smoothed reference.
  StackedField residual_at_reference() const;

 private:
  LabelStack reference_;
  std::vector<int> radii_;
  std::vector<RadialKernel> kernels_;
  LinearizationForm form_ = LinearizationForm::kTaylor;
  std::vector<MultiField> smoothed_;
  std::vector<MultiField> diagonal_;
  MultiField coupling_;
  StackedField offsets_;
};

namespace reference {
/// Direct-tap versions of the linearized operator, serial.
void apply_linearized(const LinearizedConstraint& lin, std::span<const double> u, StackedField& out);
void apply_linearized_adjoint(const LinearizedConstraint& lin, const StackedField& y, std::span<double> out);
}  // namespace reference

/// Pixels where updates are allowed during an inner solve.
struct BeltMask {
  int radius = 0;
  double threshold = 0.0;
  std::vector<std::uint8_t> inside;

  std::size_t count() const;
};

/// Belt of pixels with max_i |u_i - b_{r0} * u_i| > theta (or < theta when
/// `literal_direction` is set). The background channel is smoothed with
/// padding 1, foreground channels with padding 0.
BeltMask narrow_belt(const LabelStack& u, int r0, double theta, bool literal_direction = false);

/// Full belt (every pixel free).
BeltMask full_belt(const Grid2D& grid);

}  // namespace cvp
