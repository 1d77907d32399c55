#include <gtest/gtest.h>

#include "rpvfield/cli/commands.hpp"
#include "rpvfield/cli/run_config.hpp"

namespace rpvfield::cli {
namespace {

using Values = std::map<std::string, std::string>;

TEST(RunConfig, EveryKeyHasADefaultThatRoundTrips) {
  RunConfig defaults;
  const auto values = parse_config_text(dump(defaults), "dump");
  EXPECT_EQ(values.size(), config_keys().size());
  RunConfig reloaded;
  reloaded.seed = 99;
  reloaded.train.lambda = 0.0;
  apply_values(reloaded, values);
  EXPECT_EQ(dump(reloaded), dump(defaults));
}

TEST(RunConfig, FileValuesApply) {
  RunConfig c;
  apply_values(c, parse_config_text("# comment\nlambda = 0\nwidth=64 \n\nmode = vol\nscenario = vhard\nseed = 7\n", "t"));
  c.finalize();
  EXPECT_EQ(c.train.lambda, 0.0);
  EXPECT_EQ(c.field.trunk_width, 64);
  EXPECT_EQ(c.mode, render::ShadingMode::kVolume);
  EXPECT_EQ(c.train.mode, render::ShadingMode::kVolume);
  EXPECT_EQ(c.scenario, Scenario::kVhard);
  EXPECT_EQ(c.field.seed, 7u);
  EXPECT_EQ(c.train.seed, 7u);
}

TEST(RunConfig, LaterApplyWins) {
  RunConfig c;
  apply_values(c, parse_config_text("iterations = 100\n", "file"));
  apply_values(c, Values{{"iterations", "500"}});
  EXPECT_EQ(c.train.iterations, 500);
}

TEST(RunConfig, UnknownKeyRejected) {
  RunConfig c;
  EXPECT_THROW(apply_values(c, parse_config_text("lamda = 1\n", "t")), ConfigError);
}

TEST(RunConfig, MalformedLinesRejected) {
  EXPECT_THROW(parse_config_text("lambda 1\n", "t"), ConfigError);
  EXPECT_THROW(parse_config_text("lambda = 1\nlambda = 2\n", "t"), ConfigError);
  EXPECT_THROW(parse_config_text(" = 2\n", "t"), ConfigError);
}

TEST(RunConfig, BadValuesRejected) {
  RunConfig c;
  EXPECT_THROW(apply_values(c, Values{{"width", "6.5"}}), ConfigError);
  EXPECT_THROW(apply_values(c, Values{{"lr", "fast"}}), ConfigError);
  EXPECT_THROW(apply_values(c, Values{{"mode", "surface"}}), ConfigError);
  EXPECT_THROW(apply_values(c, Values{{"scenario", "medium"}}), ConfigError);
  RunConfig invalid;
  apply_values(invalid, Values{{"lambda", "-1"}});
  EXPECT_THROW(invalid.finalize(), ConfigError);
  RunConfig threads;
  apply_values(threads, Values{{"threads", "0"}});
  EXPECT_THROW(threads.finalize(), ConfigError);
}

TEST(Commands, ParseParams) {
  const rpv::RpvParams p = parse_params("0.1,0.2,0.3,0.996,-0.174,0.979");
  EXPECT_DOUBLE_EQ(p.rho0[2], 0.3);
  EXPECT_DOUBLE_EQ(p.k, 0.996);
  EXPECT_DOUBLE_EQ(p.theta, -0.174);
  EXPECT_DOUBLE_EQ(p.rhoc, 0.979);
  EXPECT_THROW(parse_params("0.1,0.2,0.3,0.996,-0.174"), ConfigError);
  EXPECT_THROW(parse_params("0.1,0.2,0.3,2.5,0,1"), ConfigError);
  EXPECT_THROW(parse_list("1,,2", 3, "x"), ConfigError);
}

}  // namespace
}  // namespace rpvfield::cli
