#include "cvp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#ifdef CVP_HAVE_OPENMP
#include <omp.h>
#endif

namespace cvp {

namespace {

int disc_half_width(int radius, int dy) {
  // Largest w with w^2 + dy^2 <= radius^2, in exact integer arithmetic.
  const long long r2 = static_cast<long long>(radius) * radius - static_cast<long long>(dy) * dy;
  long long w = static_cast<long long>(std::sqrt(static_cast<double>(r2)));
  while (w * w > r2) --w;
  while ((w + 1) * (w + 1) <= r2) ++w;
  return static_cast<int>(w);
}

}  // namespace

RadialKernel make_disc_kernel(int radius) {
  if (radius < 1) throw std::invalid_argument("disc kernel radius must be >= 1");
  RadialKernel k;
  k.radius_ = radius;
  k.half_widths_.resize(2 * radius + 1);
  std::size_t count = 0;
  for (int dy = -radius; dy <= radius; ++dy) {
    const int w = disc_half_width(radius, dy);
    k.half_widths_[dy + radius] = w;
    count += 2 * w + 1;
  }
  k.weight_ = 1.0 / static_cast<double>(count);
  k.taps_.reserve(count);
  for (int dy = -radius; dy <= radius; ++dy) {
    const int w = k.half_widths_[dy + radius];
    for (int dx = -w; dx <= w; ++dx) k.taps_.push_back({dy, dx, k.weight_});
  }
  return k;
}

GaussianKernel make_gaussian_kernel(double sigma_norm, const Grid2D& grid) {
  if (!(sigma_norm > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
  GaussianKernel k;
  k.sigma_norm_ = sigma_norm;
  k.sigma_px_ = sigma_norm * grid.longest_side();
  const double cutoff = 3.0 * k.sigma_px_;
  k.reach_ = static_cast<int>(std::floor(cutoff));
  const int reach = k.reach_;
  k.profile_.resize(2 * reach + 1);
  for (int d = -reach; d <= reach; ++d) {
    k.profile_[d + reach] = std::exp(-0.5 * d * d / (k.sigma_px_ * k.sigma_px_));
  }
  k.half_widths_.resize(2 * reach + 1);
  double total = 0.0;
  const double c2 = cutoff * cutoff;
  for (int dy = -reach; dy <= reach; ++dy) {
    int w = 0;
    while (w + 1 <= reach && static_cast<double>((w + 1) * (w + 1) + dy * dy) <= c2) ++w;
    k.half_widths_[dy + reach] = w;
    for (int dx = -w; dx <= w; ++dx) total += k.profile_[dy + reach] * k.profile_[dx + reach];
  }
  k.norm_ = total;
  for (int dy = -reach; dy <= reach; ++dy) {
    const int w = k.half_widths_[dy + reach];
    for (int dx = -w; dx <= w; ++dx) {
      k.taps_.push_back({dy, dx, k.profile_[dy + reach] * k.profile_[dx + reach] / total});
    }
  }
  return k;
}

int kernel_threads() {
#ifdef CVP_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_kernel_threads(int n) {
#ifdef CVP_HAVE_OPENMP
  omp_set_num_threads(std::max(1, n));
#else
  (void)n;
#endif
}

void row_prefix_sums(std::span<const double> in, const Grid2D& grid, double pad, std::span<double> prefix) {
  const int h = grid.height();
  const int w = grid.width();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const double* row = in.data() + static_cast<std::size_t>(y) * w;
    double* p = prefix.data() + static_cast<std::size_t>(y) * (w + 1);
    double acc = 0.0;
    p[0] = 0.0;
    for (int x = 0; x < w; ++x) {
      acc += row[x] - pad;
      p[x + 1] = acc;
    }
  }
}

namespace {

inline double disc_sum_at(const double* prefix, int h, int w, const RadialKernel& k, int y, int x) {
  const int r = k.radius();
  const int y0 = std::max(0, y - r);
  const int y1 = std::min(h - 1, y + r);
  double acc = 0.0;
  for (int yy = y0; yy <= y1; ++yy) {
    const int hw = k.half_width(yy - y);
    const int lo = std::max(0, x - hw);
    const int hi = std::min(w - 1, x + hw);
    if (lo > hi) continue;
    const double* p = prefix + static_cast<std::size_t>(yy) * (w + 1);
    acc += p[hi + 1] - p[lo];
  }
  return acc;
}

}  // namespace

void disc_from_prefix(std::span<const double> prefix, const Grid2D& grid, const RadialKernel& k, double pad,
                      std::span<double> out) {
  const int h = grid.height();
  const int w = grid.width();
  const double wt = k.weight();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out[static_cast<std::size_t>(y) * w + x] = wt * disc_sum_at(prefix.data(), h, w, k, y, x) + pad;
    }
  }
}

void disc_from_prefix_at(std::span<const double> prefix, const Grid2D& grid, const RadialKernel& k, double pad,
                         std::span<const std::uint32_t> pixels, std::span<double> out) {
  const int h = grid.height();
  const int w = grid.width();
  const double wt = k.weight();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(pixels.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const std::uint32_t i = pixels[t];
    const int y = static_cast<int>(i / w);
    const int x = static_cast<int>(i % w);
    out[i] = wt * disc_sum_at(prefix.data(), h, w, k, y, x) + pad;
  }
}

void disc_convolve(std::span<const double> in, const Grid2D& grid, const RadialKernel& k, double pad,
                   std::span<double> out) {
  std::vector<double> prefix(static_cast<std::size_t>(grid.height()) * (grid.width() + 1));
  row_prefix_sums(in, grid, pad, prefix);
  disc_from_prefix(prefix, grid, k, pad, out);
}

void gaussian_convolve(std::span<const double> in, const Grid2D& grid, const GaussianKernel& k, double pad,
                       std::span<double> out) {
  const int h = grid.height();
  const int w = grid.width();
  const int reach = k.reach();
  const auto profile = k.profile();

  // Horizontal partial sums for every distinct row half-width.
  std::map<int, std::vector<double>> rows;
  for (int dy = -reach; dy <= reach; ++dy) rows.try_emplace(k.half_width(dy));
  for (auto& [hw, buf] : rows) {
    buf.assign(grid.size(), 0.0);
    double* dst = buf.data();
    const int half = hw;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      const double* row = in.data() + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int dx = -half; dx <= half; ++dx) {
          const int xx = x - dx;
          if (xx < 0 || xx >= w) continue;
          acc += profile[dx + reach] * (row[xx] - pad);
        }
        dst[static_cast<std::size_t>(y) * w + x] = acc;
      }
    }
  }
  std::vector<const double*> row_of(2 * reach + 1);
  for (int dy = -reach; dy <= reach; ++dy) row_of[dy + reach] = rows.at(k.half_width(dy)).data();
  const double inv = 1.0 / k.norm();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -reach; dy <= reach; ++dy) {
        const int yy = y - dy;
        if (yy < 0 || yy >= h) continue;
        acc += profile[dy + reach] * row_of[dy + reach][static_cast<std::size_t>(yy) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc * inv + pad;
    }
  }
}

ScalarField convolve_scalar(const ScalarField& field, const RadialKernel& k, double pad) {
  ScalarField out(field.grid());
  disc_convolve(field.values(), field.grid(), k, pad, out.values());
  return out;
}

ScalarField convolve_scalar(const ScalarField& field, const GaussianKernel& k, double pad) {
  ScalarField out(field.grid());
  gaussian_convolve(field.values(), field.grid(), k, pad, out.values());
  return out;
}

MultiField convolve_stack(const LabelStack& u, const RadialKernel& k) {
  MultiField out(u.grid(), u.channels());
  for (int c = 1; c < u.channels(); ++c) disc_convolve(u.channel(c), u.grid(), k, 0.0, out.channel(c));
  return out;
}

namespace reference {

void convolve_direct(std::span<const double> in, const Grid2D& grid, std::span<const Tap> taps, double pad,
                     std::span<double> out) {
  const int h = grid.height();
  const int w = grid.width();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (const Tap& t : taps) {
        const int yy = y - t.dy;
        const int xx = x - t.dx;
        const double v = grid.contains(yy, xx) ? in[grid.index(yy, xx)] : pad;
        acc += t.weight * v;
      }
      out[grid.index(y, x)] = acc;
    }
  }
}

ScalarField convolve_scalar(const ScalarField& field, const RadialKernel& k, double pad) {
  ScalarField out(field.grid());
  convolve_direct(field.values(), field.grid(), k.taps(), pad, out.values());
  return out;
}

ScalarField convolve_scalar(const ScalarField& field, const GaussianKernel& k, double pad) {
  ScalarField out(field.grid());
  convolve_direct(field.values(), field.grid(), k.taps(), pad, out.values());
  return out;
}

MultiField convolve_stack(const LabelStack& u, const RadialKernel& k) {
  MultiField out(u.grid(), u.channels());
  for (int c = 1; c < u.channels(); ++c) convolve_direct(u.channel(c), u.grid(), k.taps(), 0.0, out.channel(c));
  return out;
}

}  // namespace reference

}  // namespace cvp
