#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cvp/kernels.hpp"

using cvp::Grid2D;

namespace {

std::vector<double> random_values(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

// Direct disc average with explicit bounds checks.
std::vector<double> brute_disc(const std::vector<double>& in, const Grid2D& g, int r, double pad) {
  std::vector<double> out(g.size());
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      double s = 0.0;
      int n = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (dx * dx + dy * dy > r * r) continue;
          ++n;
          s += g.contains(y + dy, x + dx) ? in[g.index(y + dy, x + dx)] : pad;
        }
      }
      out[g.index(y, x)] = s / n;
    }
  }
  return out;
}

}  // namespace

TEST(DiscKernel, TapCounts) {
  EXPECT_EQ(cvp::make_disc_kernel(1).taps().size(), 5u);
  EXPECT_EQ(cvp::make_disc_kernel(2).taps().size(), 13u);
  EXPECT_EQ(cvp::make_disc_kernel(3).taps().size(), 29u);
  EXPECT_THROW(cvp::make_disc_kernel(0), std::invalid_argument);
}

TEST(DiscKernel, WeightsSumToOneAndMatchHalfWidths) {
  for (int r : {1, 4, 9, 17}) {
    auto k = cvp::make_disc_kernel(r);
    double sum = 0.0;
    for (const auto& t : k.taps()) {
      sum += t.weight;
      EXPECT_LE(t.dx * t.dx + t.dy * t.dy, r * r);
      EXPECT_LE(std::abs(t.dx), k.half_width(t.dy));
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    for (int dy = -r; dy <= r; ++dy) {
      const int hw = k.half_width(dy);
      EXPECT_LE(hw * hw + dy * dy, r * r);
      EXPECT_GT((hw + 1) * (hw + 1) + dy * dy, r * r);
    }
  }
}

TEST(DiscConvolve, MatchesBruteForce) {
  Grid2D g(23, 31);
  auto in = random_values(g.size(), 1);
  for (int r : {1, 3, 7, 12, 40}) {
    for (double pad : {0.0, 1.0, -1.0}) {
      auto k = cvp::make_disc_kernel(r);
      std::vector<double> fast(g.size()), ref(g.size());
      cvp::disc_convolve(in, g, k, pad, fast);
      cvp::reference::convolve_direct(in, g, k.taps(), pad, ref);
      auto brute = brute_disc(in, g, r, pad);
      for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(fast[i], brute[i], 1e-12) << "r=" << r << " pad=" << pad;
        EXPECT_NEAR(ref[i], brute[i], 1e-12) << "r=" << r << " pad=" << pad;
      }
    }
  }
}

TEST(DiscConvolve, SubsetEvaluationMatchesFull) {
  Grid2D g(16, 20);
  auto in = random_values(g.size(), 2);
  auto k = cvp::make_disc_kernel(4);
  std::vector<double> prefix(g.height() * (g.width() + 1));
  cvp::row_prefix_sums(in, g, 0.0, prefix);
  std::vector<double> full(g.size());
  cvp::disc_from_prefix(prefix, g, k, 0.0, full);
  std::vector<std::uint32_t> idx = {0, 7, 55, 199, 319};
  std::vector<double> part(g.size(), -5.0);
  cvp::disc_from_prefix_at(prefix, g, k, 0.0, idx, part);
  for (auto i : idx) EXPECT_EQ(part[i], full[i]);
  EXPECT_EQ(part[1], -5.0);
}

TEST(DiscConvolve, ConstantFieldIsFixedWithMatchingPad) {
  Grid2D g(12, 12);
  std::vector<double> in(g.size(), 0.7), out(g.size());
  cvp::disc_convolve(in, g, cvp::make_disc_kernel(5), 0.7, out);
  for (double v : out) EXPECT_NEAR(v, 0.7, 1e-14);
}

TEST(DiscConvolve, ThreadCountDoesNotChangeBits) {
  Grid2D g(64, 48);
  auto in = random_values(g.size(), 3);
  auto k = cvp::make_disc_kernel(6);
  const int saved = cvp::kernel_threads();
  cvp::set_kernel_threads(1);
  std::vector<double> one(g.size()), many(g.size());
  cvp::disc_convolve(in, g, k, 0.0, one);
  cvp::set_kernel_threads(4);
  cvp::disc_convolve(in, g, k, 0.0, many);
  cvp::set_kernel_threads(saved);
  EXPECT_EQ(one, many);
}

TEST(GaussianKernel, NormalizedAndTruncated) {
  Grid2D g(100, 50);
  auto k = cvp::make_gaussian_kernel(0.02, g);
  EXPECT_DOUBLE_EQ(k.sigma_px(), 2.0);
  EXPECT_EQ(k.reach(), 6);
  double sum = 0.0;
  for (const auto& t : k.taps()) {
    sum += t.weight;
    EXPECT_LE(t.dx * t.dx + t.dy * t.dy, 36);
    const double expect = std::exp(-(t.dx * t.dx + t.dy * t.dy) / 8.0) / k.norm();
    EXPECT_NEAR(t.weight, expect, 1e-15);
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_THROW(cvp::make_gaussian_kernel(0.0, g), std::invalid_argument);
}

TEST(GaussianConvolve, MatchesDirectTaps) {
  Grid2D g(30, 25);
  auto in = random_values(g.size(), 4);
  for (double sigma : {0.01, 0.04, 0.1}) {
    auto k = cvp::make_gaussian_kernel(sigma, g);
    for (double pad : {0.0, 1.0}) {
      std::vector<double> fast(g.size()), ref(g.size());
      cvp::gaussian_convolve(in, g, k, pad, fast);
      cvp::reference::convolve_direct(in, g, k.taps(), pad, ref);
      for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(fast[i], ref[i], 1e-12);
    }
  }
}

TEST(ConvolveStack, BackgroundChannelIsZero) {
  Grid2D g(10, 10);
  cvp::LabelStack u(g, 3);
  for (std::size_t i = 0; i < g.size(); i += 3) {
    u.at(0, i) = 0.0;
    u.at(2, i) = 1.0;
  }
  auto k = cvp::make_disc_kernel(2);
  auto fast = cvp::convolve_stack(u, k);
  auto ref = cvp::reference::convolve_stack(u, k);
  for (double v : fast.channel(0)) EXPECT_EQ(v, 0.0);
  for (std::size_t i = 0; i < fast.values().size(); ++i) EXPECT_NEAR(fast.values()[i], ref.values()[i], 1e-14);
  auto f = cvp::convolve_scalar(u.channel_field(2), k, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(f[i], fast.at(2, i), 1e-14);
}
