#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cvp/convexity.hpp"
#include "cvp/fixtures.hpp"
#include "oracles.hpp"

using cvp::Grid2D;
using cvp::LabelStack;

namespace {

LabelStack random_stack(const Grid2D& g, int channels, unsigned seed) {
  std::mt19937 rng(seed);
  std::exponential_distribution<double> dist(1.0);
  LabelStack u(g, channels);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (int c = 0; c < channels; ++c) s += (u.at(c, i) = dist(rng));
    for (int c = 0; c < channels; ++c) u.at(c, i) /= s;
  }
  return u;
}

LabelStack mask_stack(const cvp::RegionMask& m) {
  std::vector<int> labels(m.grid().size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = m[i] ? 1 : 0;
  return LabelStack::from_labels(m.grid(), 2, labels);
}

}  // namespace

TEST(ConvexityResidual, MatchesOracle) {
  Grid2D g(14, 17);
  auto u = random_stack(g, 3, 1);
  for (int r : {1, 3, 6}) {
    auto res = cvp::convexity_residual(u, r);
    auto expect = oracle::convexity_residual(u, r);
    ASSERT_EQ(res.values.values().size(), expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(res.values.values()[i], expect[i], 1e-13);
  }
}

TEST(ConvexityResidual, ConvexDiscHasNoViolations) {
  Grid2D g(64, 64);
  auto u = mask_stack(cvp::fixtures::disc_mask(g, {31.5, 31.5}, 15));
  std::vector<int> radii = {1, 3, 7, 12};
  EXPECT_EQ(cvp::violation_count(u, radii), 0);
  for (int r : radii) EXPECT_GE(cvp::convexity_residual(u, r).min_foreground(), -1e-12);
}

TEST(ConvexityResidual, LShapeViolatesAtReentrantCorner) {
  Grid2D g(40, 40);
  cvp::RegionMask m(g);
  for (int y = 10; y < 30; ++y)
    for (int x = 10; x < 30; ++x)
      if (!(y >= 20 && x >= 20)) m.set(y, x);
  auto u = mask_stack(m);
  auto res = cvp::convexity_residual(u, 3);
  EXPECT_LT(res.min_foreground(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (res.values.at(1, i) < -1e-9) {
      const int y = static_cast<int>(i) / 40, x = static_cast<int>(i) % 40;
      EXPECT_LE(std::hypot(y - 19.5, x - 19.5), 4.5) << y << "," << x;
    }
  }
  const std::vector<int> radii = {1, 4, 7, 10, 13};
  EXPECT_GT(cvp::violation_count(u, radii), 0);
  EXPECT_THROW(cvp::violation_count(u, radii, -1.0), std::invalid_argument);
}

TEST(ConvexityResidual, EmptyForegroundIsHalf) {
  Grid2D g(12, 12);
  LabelStack u(g, 2);
  auto res = cvp::convexity_residual(u, 2);
  for (double v : res.values.channel(1)) EXPECT_EQ(v, 0.5);
  const std::vector<int> radii = {1, 2};
  EXPECT_EQ(cvp::violation_count(u, radii), 0);
}

TEST(Linearization, TaylorRemainderIsExact) {
  Grid2D g(12, 13);
  auto uk = random_stack(g, 3, 2);
  auto u = random_stack(g, 3, 3);
  for (int r : {1, 2, 5}) {
    cvp::LinearizedConstraint lin(uk, {r});
    auto au = lin.make_stacked();
    lin.apply(u.values(), au);
    auto c = cvp::convexity_residual(u, r);
    auto ora = oracle::linearized_minus_offset(u, uk, r);
    const std::size_t n = g.size();
    for (int ch = 0; ch < 3; ++ch) {
      std::vector<double> diff(n);
      for (std::size_t i = 0; i < n; ++i) diff[i] = u.at(ch, i) - uk.at(ch, i);
      for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
          const std::size_t i = g.index(y, x);
          const double quad = ch == 0 ? 0.0 : diff[i] * oracle::disc_mean(diff, g.height(), g.width(), y, x, r, 0.0);
          const double lin_part = au.block(0, ch)[i] - lin.offsets().block(0, ch)[i];
          EXPECT_NEAR(lin_part, ora[ch * n + i], 1e-13);
          EXPECT_NEAR(c.values.at(ch, i), lin_part + quad, 1e-12);
        }
      }
    }
  }
}

TEST(Linearization, FormsAgreeAtReference) {
  Grid2D g(10, 10);
  auto uk = random_stack(g, 2, 4);
  cvp::LinearizedConstraint taylor(uk, {2, 4});
  cvp::LinearizedConstraint doubled(uk, {2, 4}, cvp::LinearizationForm::kDoubled);
  auto a = taylor.make_stacked(), b = doubled.make_stacked();
  taylor.apply(uk.values(), a);
  doubled.apply(uk.values(), b);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-13);
  auto res = taylor.residual_at_reference();
  for (int e = 0; e < 2; ++e) {
    auto direct = cvp::convexity_residual(uk, taylor.radii()[e]);
    for (int c = 0; c < 2; ++c) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(res.block(e, c)[i], direct.values.at(c, i), 1e-13);
        EXPECT_NEAR(a.block(e, c)[i] - taylor.offsets().block(e, c)[i], direct.values.at(c, i), 1e-13);
      }
    }
  }
}

TEST(Linearization, AdjointIdentityBothForms) {
  Grid2D g(11, 15);
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  for (auto form : {cvp::LinearizationForm::kTaylor, cvp::LinearizationForm::kDoubled}) {
    auto uk = random_stack(g, 3, 6);
    cvp::LinearizedConstraint lin(uk, {1, 3, 6}, form);
    std::vector<double> u(uk.values().size());
    for (auto& x : u) x = nd(rng);
    auto y = lin.make_stacked();
    for (auto& x : y.values()) x = nd(rng);
    auto au = lin.make_stacked();
    lin.apply(u, au);
    std::vector<double> aty(u.size());
    lin.apply_adjoint(y, aty);
    const double lhs = cvp::dot(au.values(), y.values());
    const double rhs = cvp::dot(u, aty);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Linearization, FastMatchesReference) {
  Grid2D g(20, 18);
  auto uk = random_stack(g, 3, 7);
  auto u = random_stack(g, 3, 8);
  cvp::LinearizedConstraint lin(uk, {2, 5});
  auto fast = lin.make_stacked(), ref = lin.make_stacked();
  lin.apply(u.values(), fast);
  cvp::reference::apply_linearized(lin, u.values(), ref);
  for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast.values()[i], ref.values()[i], 1e-13);
  std::vector<double> a(u.values().size()), b(u.values().size());
  lin.apply_adjoint(fast, a);
  cvp::reference::apply_linearized_adjoint(lin, fast, b);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Belt, SelectsBoundaryOfSquare) {
  Grid2D g(40, 40);
  cvp::RegionMask m(g);
  for (int y = 10; y < 30; ++y)
    for (int x = 10; x < 30; ++x) m.set(y, x);
  auto u = mask_stack(m);
  auto belt = cvp::narrow_belt(u, 3, 0.1);
  EXPECT_TRUE(belt.inside[g.index(10, 20)]);
  EXPECT_TRUE(belt.inside[g.index(9, 20)]);
  EXPECT_FALSE(belt.inside[g.index(20, 20)]);
  EXPECT_FALSE(belt.inside[g.index(0, 0)]);
  auto literal = cvp::narrow_belt(u, 3, 0.1, true);
  EXPECT_EQ(belt.count() + literal.count(), g.size());
  EXPECT_EQ(cvp::full_belt(g).count(), g.size());
  EXPECT_THROW(cvp::narrow_belt(u, 0, 0.1), std::invalid_argument);
  EXPECT_THROW(cvp::narrow_belt(u, 3, 1.0), std::invalid_argument);
}

TEST(Oracle, DigitalConvexityAgreesWithLibraryOnCorpus) {
  Grid2D g(96, 96);
  for (const auto& s : cvp::fixtures::theorem_corpus(g, 11)) {
    EXPECT_EQ(oracle::digitally_convex(s.mask), cvp::digital_convexity_oracle(s.mask)) << s.name;
  }
}
