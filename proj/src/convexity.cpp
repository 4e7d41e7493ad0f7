#include "cvp/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvp {

double ConvexityResidual::min_foreground() const {
  double m = std::numeric_limits<double>::infinity();
  for (int c = 1; c < values.channels(); ++c) {
    for (double v : values.channel(c)) m = std::min(m, v);
  }
  return m;
}

ConvexityResidual convexity_residual(const LabelStack& u, int radius) {
  const auto kernel = make_disc_kernel(radius);
  const MultiField smoothed = convolve_stack(u, kernel);
  ConvexityResidual res{radius, MultiField(u.grid(), u.channels())};
  const std::size_t n = u.pixels();
  for (int c = 0; c < u.channels(); ++c) {
    auto uc = u.channel(c);
    auto bc = smoothed.channel(c);
    auto out = res.values.channel(c);
    for (std::size_t i = 0; i < n; ++i) out[i] = (uc[i] - 1.0) * bc[i] - 0.5 * (uc[i] - 1.0);
  }
  return res;
}

long violation_count(const LabelStack& u, std::span<const int> radii, double tol) {
  if (tol < 0.0) throw std::invalid_argument("violation tolerance must be >= 0");
  long count = 0;
  for (int r : radii) {
    const auto res = convexity_residual(u, r);
    for (int c = 1; c < u.channels(); ++c) {
      for (double v : res.values.channel(c)) {
        if (v < -tol) ++count;
      }
    }
  }
  return count;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

LinearizedConstraint::LinearizedConstraint(const LabelStack& reference, std::vector<int> radii,
                                           LinearizationForm form)
    : reference_(reference), radii_(std::move(radii)), form_(form) {
  if (radii_.empty()) throw std::invalid_argument("linearization needs at least one radius");
  const std::size_t n = pixels();
  const int ch = channels();
  offsets_ = StackedField(slots(), ch, n);
  coupling_ = MultiField(reference_.grid(), ch);
  for (int c = 1; c < ch; ++c) {
    auto uk = reference_.channel(c);
    auto k = coupling_.channel(c);
    for (std::size_t i = 0; i < n; ++i) k[i] = form_ == LinearizationForm::kTaylor ? uk[i] - 1.0 : -1.0;
  }
  const double self = form_ == LinearizationForm::kTaylor ? 1.0 : 2.0;
  for (std::size_t e = 0; e < radii_.size(); ++e) {
    kernels_.push_back(make_disc_kernel(radii_[e]));
    smoothed_.push_back(convolve_stack(reference_, kernels_.back()));
    diagonal_.emplace_back(reference_.grid(), ch);
    for (int c = 0; c < ch; ++c) {
      auto uk = reference_.channel(c);
      auto b = smoothed_.back().channel(c);
      auto off = offsets_.block(static_cast<int>(e), c);
      auto d = diagonal_.back().channel(c);
      for (std::size_t i = 0; i < n; ++i) {
        off[i] = uk[i] * b[i] - 0.5;
        d[i] = self * b[i] - 0.5;
      }
    }
  }
}

void LinearizedConstraint::apply(std::span<const double> u, StackedField& out) const {
  const std::size_t n = pixels();
  const int ch = channels();
  std::vector<double> conv(n);
  for (int e = 0; e < slots(); ++e) {
    // Background: b_r * u_0 := 0 and b_r * u^k_0 = 0, so A u_0 = -u_0 / 2.
    {
      auto dst = out.block(e, 0);
      for (std::size_t i = 0; i < n; ++i) dst[i] = -0.5 * u[i];
    }
    for (int c = 1; c < ch; ++c) {
      std::span<const double> uc = u.subspan(c * n, n);
      disc_convolve(uc, grid(), kernels_[e], 0.0, conv);
      auto d = diagonal_[e].channel(c);
      auto k = coupling_.channel(c);
      auto dst = out.block(e, c);
      for (std::size_t i = 0; i < n; ++i) dst[i] = d[i] * uc[i] + k[i] * conv[i];
    }
  }
}

void LinearizedConstraint::apply_adjoint(const StackedField& y, std::span<double> out) const {
  const std::size_t n = pixels();
  const int ch = channels();
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> conv(n), weighted(n);
  for (int e = 0; e < slots(); ++e) {
    {
      auto src = y.block(e, 0);
      for (std::size_t i = 0; i < n; ++i) out[i] += -0.5 * src[i];
    }
    for (int c = 1; c < ch; ++c) {
      auto src = y.block(e, c);
      auto d = diagonal_[e].channel(c);
      auto k = coupling_.channel(c);
      for (std::size_t i = 0; i < n; ++i) weighted[i] = k[i] * src[i];
      disc_convolve(weighted, grid(), kernels_[e], 0.0, conv);
      double* dst = out.data() + c * n;
      for (std::size_t i = 0; i < n; ++i) dst[i] += d[i] * src[i] + conv[i];
    }
  }
}

StackedField LinearizedConstraint::residual_at_reference() const {
  StackedField res = make_stacked();
  const std::size_t n = pixels();
  for (int e = 0; e < slots(); ++e) {
    for (int c = 0; c < channels(); ++c) {
      auto uk = reference_.channel(c);
      auto b = smoothed_[e].channel(c);
      auto dst = res.block(e, c);
      for (std::size_t i = 0; i < n; ++i) dst[i] = (uk[i] - 1.0) * b[i] - 0.5 * (uk[i] - 1.0);
    }
  }
  return res;
}

namespace reference {

// Written from the defining formulas rather than the cached coefficients.
void apply_linearized(const LinearizedConstraint& lin, std::span<const double> u, StackedField& out) {
  const std::size_t n = lin.pixels();
  const bool taylor = lin.form() == LinearizationForm::kTaylor;
  std::vector<double> conv(n);
  for (int e = 0; e < lin.slots(); ++e) {
    for (int c = 0; c < lin.channels(); ++c) {
      std::span<const double> uc = u.subspan(c * n, n);
      auto uk = lin.reference().channel(c);
      auto b = lin.smoothed_reference(e).channel(c);
      auto dst = out.block(e, c);
      if (c == 0) {
        for (std::size_t i = 0; i < n; ++i) dst[i] = -0.5 * uc[i];
        continue;
      }
      convolve_direct(uc, lin.grid(), lin.kernels()[e].taps(), 0.0, conv);
      for (std::size_t i = 0; i < n; ++i) {
        dst[i] = taylor ? uc[i] * b[i] + uk[i] * conv[i] - conv[i] - 0.5 * uc[i]
                        : 2.0 * uc[i] * b[i] - 0.5 * uc[i] - conv[i];
      }
    }
  }
}

void apply_linearized_adjoint(const LinearizedConstraint& lin, const StackedField& y, std::span<double> out) {
  const std::size_t n = lin.pixels();
  const bool taylor = lin.form() == LinearizationForm::kTaylor;
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> conv(n), weighted(n);
  for (int e = 0; e < lin.slots(); ++e) {
    for (int c = 0; c < lin.channels(); ++c) {
      auto src = y.block(e, c);
      if (c == 0) {
        for (std::size_t i = 0; i < n; ++i) out[i] += -0.5 * src[i];
        continue;
      }
      auto uk = lin.reference().channel(c);
      auto b = lin.smoothed_reference(e).channel(c);
      for (std::size_t i = 0; i < n; ++i) weighted[i] = taylor ? (uk[i] - 1.0) * src[i] : -src[i];
      convolve_direct(weighted, lin.grid(), lin.kernels()[e].taps(), 0.0, conv);
      const double self = taylor ? 1.0 : 2.0;
      for (std::size_t i = 0; i < n; ++i) out[c * n + i] += self * b[i] * src[i] - 0.5 * src[i] + conv[i];
    }
  }
}

}  // namespace reference

std::size_t BeltMask::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

BeltMask narrow_belt(const LabelStack& u, int r0, double theta, bool literal_direction) {
  if (r0 < 1) throw std::invalid_argument("belt radius must be >= 1");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("belt threshold must lie in (0,1)");
  const auto kernel = make_disc_kernel(r0);
  const std::size_t n = u.pixels();
  std::vector<double> deviation(n, 0.0);
  std::vector<double> conv(n);
  for (int c = 0; c < u.channels(); ++c) {
    auto uc = u.channel(c);
    disc_convolve(uc, u.grid(), kernel, c == 0 ? 1.0 : 0.0, conv);
    for (std::size_t i = 0; i < n; ++i) deviation[i] = std::max(deviation[i], std::abs(uc[i] - conv[i]));
  }
  BeltMask belt{r0, theta, std::vector<std::uint8_t>(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    const bool sel = literal_direction ? deviation[i] < theta : deviation[i] > theta;
    belt.inside[i] = sel ? 1 : 0;
  }
  return belt;
}

BeltMask full_belt(const Grid2D& grid) {
  return BeltMask{0, 0.0, std::vector<std::uint8_t>(grid.size(), 1)};
}

}  // namespace cvp
