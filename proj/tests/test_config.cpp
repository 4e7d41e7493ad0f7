#include <gtest/gtest.h>

#include "cvp/config.hpp"
#include "cvp/errors.hpp"

using cvp::RunConfig;

TEST(Config, DefaultsValidate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.admm.alpha_mode, cvp::AlphaMode::kSafe);
  EXPECT_EQ(c.admm.mu, 1.0);
  EXPECT_EQ(c.outer.lambda, 2.0);
  EXPECT_EQ(c.gamma, 10.0);
}

TEST(Config, SetAcceptsDashesAndParsesValues) {
  RunConfig c;
  c.set("belt-radius", "5");
  c.set("alpha", "paper");
  c.set("radii", "1,4,7,10,13");
  c.set("warm_multipliers", "false");
  c.set("linearization", "doubled");
  c.set("sigma", "0.02");
  EXPECT_EQ(c.outer.belt_radius, 5);
  EXPECT_EQ(c.admm.alpha_mode, cvp::AlphaMode::kFixed);
  EXPECT_EQ(c.outer.radii_override, (std::vector<int>{1, 4, 7, 10, 13}));
  EXPECT_FALSE(c.admm.warm_multipliers);
  EXPECT_EQ(c.outer.linearization, cvp::LinearizationForm::kDoubled);
  EXPECT_EQ(c.outer.sigma, 0.02);
}

TEST(Config, RejectsUnknownAndMalformed) {
  RunConfig c;
  EXPECT_THROW(c.set("bogus", "1"), cvp::ValidationError);
  EXPECT_THROW(c.set("mu", "abc"), cvp::ValidationError);
  EXPECT_THROW(c.set("max_outer", "1.5"), cvp::ValidationError);
  EXPECT_THROW(c.set("alpha", "fast"), cvp::ValidationError);
  EXPECT_THROW(c.set("radii", "1,,3"), cvp::ValidationError);
  EXPECT_THROW(c.set("seed", "-4"), cvp::ValidationError);
}

TEST(Config, ValidateReportsRanges) {
  RunConfig c;
  c.set("tau", "1.7");
  EXPECT_THROW(c.validate(), cvp::ValidationError);
  RunConfig d;
  d.set("radii", "0,3");
  EXPECT_THROW(d.validate(), cvp::ValidationError);
  RunConfig e;
  e.set("gamma", "-1");
  EXPECT_THROW(e.validate(), cvp::ValidationError);
}

TEST(Config, MapRoundTrip) {
  RunConfig c;
  c.set("omega", "0.25");
  c.set("radii", "2,6");
  c.set("seed", "17");
  RunConfig d;
  for (const auto& [k, v] : c.to_map()) d.set(k, v);
  EXPECT_EQ(c.to_map(), d.to_map());
  EXPECT_EQ(c.to_map().size(), RunConfig::keys().size());
}

TEST(Config, FileThenFlags) {
  const std::string text =
      "# comment\n"
      "lambda = 3.5\n"
      "\n"
      "mu=2   # trailing\n"
      "theta = 0.2\n";
  auto c = cvp::load_config(text, {{"mu", "4"}});
  EXPECT_EQ(c.outer.lambda, 3.5);
  EXPECT_EQ(c.admm.mu, 4.0);
  EXPECT_EQ(c.outer.theta, 0.2);
}

TEST(Config, FileErrors) {
  EXPECT_THROW(cvp::parse_config_text("lambda 3\n"), cvp::ValidationError);
  EXPECT_THROW(cvp::parse_config_text("mu=1\nmu=2\n"), cvp::ValidationError);
  EXPECT_THROW(cvp::parse_config_text(" = 2\n"), cvp::ValidationError);
  EXPECT_THROW(cvp::load_config("nope = 1\n", {}), cvp::ValidationError);
  EXPECT_TRUE(cvp::parse_config_text("").empty());
}

TEST(Config, IntList) {
  EXPECT_EQ(cvp::parse_int_list(" 1, 2 ,3 "), (std::vector<int>{1, 2, 3}));
  EXPECT_TRUE(cvp::parse_int_list("").empty());
}
