#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cvp/field.hpp"

using cvp::Grid2D;
using cvp::LabelStack;

TEST(Grid, RejectsSmallGrids) {
  EXPECT_THROW(Grid2D(7, 8), std::invalid_argument);
  EXPECT_THROW(Grid2D(8, 7), std::invalid_argument);
  EXPECT_NO_THROW(Grid2D(8, 8));
}

TEST(Grid, IndexingIsRowMajor) {
  Grid2D g(10, 12);
  EXPECT_EQ(g.size(), 120u);
  EXPECT_EQ(g.index(2, 3), 27u);
  EXPECT_EQ(g.longest_side(), 12);
  EXPECT_TRUE(g.contains(9, 11));
  EXPECT_FALSE(g.contains(10, 0));
  EXPECT_FALSE(g.contains(0, -1));
  EXPECT_DOUBLE_EQ(g.normalized(0), 0.5 / 12);
}

TEST(ScalarField, FiniteCheck) {
  cvp::ScalarField f(Grid2D(8, 8), 1.0);
  EXPECT_TRUE(f.all_finite());
  f(3, 4) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(f.all_finite());
  EXPECT_THROW(cvp::ScalarField(Grid2D(8, 8), std::vector<double>(63)), std::invalid_argument);
}

TEST(LabelStack, DefaultIsBackground) {
  LabelStack u(Grid2D(8, 9), 3);
  EXPECT_EQ(u.classes(), 2);
  EXPECT_TRUE(u.on_simplex());
  EXPECT_TRUE(u.is_binary());
  for (int l : u.argmax()) EXPECT_EQ(l, 0);
}

TEST(LabelStack, ChannelMajorLayout) {
  Grid2D g(8, 8);
  std::vector<double> v(g.size() * 2, 0.0);
  v[g.size() + 5] = 1.0;
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = i == 5 ? 0.0 : 1.0;
  LabelStack u(g, 2, v);
  EXPECT_EQ(u.at(1, 5), 1.0);
  EXPECT_EQ(u.channel(1)[5], 1.0);
  EXPECT_EQ(u.argmax()[5], 1);
  EXPECT_EQ(u.argmax()[4], 0);
}

TEST(LabelStack, SimplexAndBinaryChecks) {
  Grid2D g(8, 8);
  LabelStack u(g, 2);
  u.at(0, 0) = 0.5;
  u.at(1, 0) = 0.5;
  EXPECT_TRUE(u.on_simplex());
  EXPECT_FALSE(u.is_binary());
  u.at(1, 0) = 0.6;
  EXPECT_FALSE(u.on_simplex());
  u.at(0, 0) = -0.1;
  u.at(1, 0) = 1.1;
  EXPECT_FALSE(u.on_simplex());
}

TEST(LabelStack, ArgmaxTiesGoToLowestIndex) {
  Grid2D g(8, 8);
  LabelStack u(g, 3);
  u.at(0, 0) = 0.2;
  u.at(1, 0) = 0.4;
  u.at(2, 0) = 0.4;
  EXPECT_EQ(u.argmax()[0], 1);
}

TEST(LabelStack, FromLabelsRoundTrip) {
  Grid2D g(8, 8);
  std::vector<int> labels(g.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);
  auto u = LabelStack::from_labels(g, 3, labels);
  EXPECT_TRUE(u.is_binary());
  EXPECT_TRUE(u.on_simplex(0.0));
  EXPECT_EQ(u.argmax(), labels);
  labels[0] = 3;
  EXPECT_THROW(LabelStack::from_labels(g, 3, labels), std::invalid_argument);
}

TEST(LabelStack, ChannelFieldRoundTrip) {
  Grid2D g(8, 8);
  LabelStack u(g, 2);
  cvp::ScalarField f(g, 0.25);
  u.set_channel(1, f);
  EXPECT_EQ(u.channel_field(1).values()[10], 0.25);
  EXPECT_THROW(u.set_channel(1, cvp::ScalarField(Grid2D(9, 8))), std::invalid_argument);
  EXPECT_THROW(LabelStack(g, 1), std::invalid_argument);
}

TEST(Image, DifferenceGrayAndColor) {
  Grid2D g(8, 8);
  std::vector<double> gray(g.size(), 0.0);
  gray[1] = 0.75;
  cvp::Image a(g, 1, gray);
  EXPECT_DOUBLE_EQ(a.difference(0, 1), 0.75);
  std::vector<double> rgb(g.size() * 3, 0.0);
  rgb[3] = 0.3;
  rgb[4] = 0.4;
  cvp::Image b(g, 3, rgb);
  EXPECT_NEAR(b.difference(0, 1), 0.5, 1e-15);
  EXPECT_THROW(cvp::Image(g, 2, std::vector<double>(g.size() * 2)), std::invalid_argument);
}
