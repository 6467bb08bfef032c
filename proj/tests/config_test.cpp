#include "explore/config.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

using explore::ConfigError;
using explore::MiscalibrationSpec;
using explore::RunConfig;
using nlohmann::json;

namespace {

std::string error_of(const json& doc) {
  try {
    explore::run_config_from_json(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalObjectGivesDefaults) {
  const RunConfig config = explore::run_config_from_json(json::object());
  EXPECT_EQ(config.world.num_users, 2000u);
  EXPECT_EQ(config.world.steps, 250u);
  EXPECT_TRUE(config.treatment.filter_enabled);
  EXPECT_DOUBLE_EQ(config.treatment.k, 2.0);
  EXPECT_FALSE(config.control.filter_enabled);
  EXPECT_EQ(config.seeds.size(), 10u);
  EXPECT_DOUBLE_EQ(config.diversion.user_fraction, 0.5);
  EXPECT_DOUBLE_EQ(config.treatment.prior.alpha, 1.0);
  EXPECT_FALSE(config.parallel);
}

TEST(Config, NegativeKNamesOffendingKey) {
  const std::string error = error_of({{"treatment", {{"k", -1.0}}}});
  EXPECT_NE(error.find("treatment.k"), std::string::npos);
  EXPECT_NE(error.find(">= 0"), std::string::npos);
}

TEST(Config, UnknownTopLevelKeyRejected) {
  const std::string error = error_of({{"wrold", json::object()}});
  EXPECT_NE(error.find("unknown key: wrold"), std::string::npos);
}

TEST(Config, UnknownNestedKeyRejected) {
  const std::string error = error_of({{"world", {{"user_count", 10}}}});
  EXPECT_NE(error.find("unknown key: world.user_count"), std::string::npos);
}

TEST(Config, WrongTypeNamesKey) {
  const std::string error = error_of({{"world", {{"num_users", "many"}}}});
  EXPECT_NE(error.find("world.num_users"), std::string::npos);
}

TEST(Config, NegativeCountRejected) {
  const std::string error = error_of({{"world", {{"num_users", -2}}}});
  EXPECT_NE(error.find("world.num_users"), std::string::npos);
}

TEST(Config, ZeroUsersRejectedByValidation) {
  const std::string error = error_of({{"world", {{"num_users", 0}}}});
  EXPECT_NE(error.find("world.num_users"), std::string::npos);
}

TEST(Config, RetrievalSmallerThanSlateRejected) {
  const std::string error = error_of(
      {{"treatment", {{"retrieval_size", 1}, {"slate_size", 3}}}});
  EXPECT_NE(error.find("treatment.retrieval_size"), std::string::npos);
}

TEST(Config, EmptySeedListRejected) {
  const std::string error = error_of({{"seeds", json::array()}});
  EXPECT_NE(error.find("seeds"), std::string::npos);
}

TEST(Config, NegativeSeedRejected) {
  const std::string error = error_of({{"seeds", {1, -4}}});
  EXPECT_NE(error.find("seeds"), std::string::npos);
}

TEST(Config, DuplicateSeedsRejected) {
  const std::string error = error_of({{"seeds", {3, 1, 3}}});
  EXPECT_NE(error.find("duplicate seed 3"), std::string::npos);
}

TEST(Config, MiscalibrationModes) {
  RunConfig config = explore::run_config_from_json(
      {{"world",
        {{"miscalibration", {{"mode", "power"}, {"param", 0.8}}}}}});
  EXPECT_EQ(config.world.miscalibration.mode,
            MiscalibrationSpec::Mode::kPower);
  EXPECT_DOUBLE_EQ(config.world.miscalibration.param, 0.8);

  const std::string error = error_of(
      {{"world", {{"miscalibration", {{"mode", "quadratic"}}}}}});
  EXPECT_NE(error.find("miscalibration.mode"), std::string::npos);
}

TEST(Config, BadDiversionFractionRejected) {
  const std::string error =
      error_of({{"diversion", {{"user_fraction", 1.0}}}});
  EXPECT_NE(error.find("diversion.user_fraction"), std::string::npos);
}

TEST(Config, RoundTripIsIdempotent) {
  json doc = {
      {"world",
       {{"num_users", 500},
        {"dim", 8},
        {"num_clusters", 4},
        {"items_per_step", 3},
        {"steps", 100},
        {"logit_scale", 1.5},
        {"quality_offset_mean", -2.0},
        {"quality_offset_std", 0.7},
        {"miscalibration", {{"mode", "additive-noise"}, {"param", 0.05}}},
        {"seed", 11}}},
      {"treatment",
       {{"filter_enabled", true},
        {"k", 1.5},
        {"retrieval_size", 4},
        {"slate_size", 2},
        {"graduation", {{"min_impressions", 150}, {"min_posterior_mean", 0.2}}},
        {"prior", {{"alpha", 2.0}, {"beta", 6.0}}}}},
      {"control", {{"filter_enabled", false}}},
      {"diversion", {{"user_fraction", 0.4}, {"item_fraction", 0.6}}},
      {"seeds", {4, 5, 6}},
      {"parallel", true},
      {"output", {{"report_path", "out.json"}, {"audit_dir", "audits"}}}};

  const RunConfig first = explore::run_config_from_json(doc);
  const json serialized = explore::to_json(first);
  const RunConfig second = explore::run_config_from_json(serialized);
  EXPECT_EQ(serialized.dump(), explore::to_json(second).dump());
  EXPECT_EQ(first.world.num_users, 500u);
  EXPECT_EQ(second.world.miscalibration.mode,
            MiscalibrationSpec::Mode::kAdditiveNoise);
  EXPECT_TRUE(second.parallel);
  EXPECT_EQ(second.seeds, (std::vector<uint64_t>{4, 5, 6}));
}

TEST(Config, ShippedExampleConfigRoundTrips) {
  const RunConfig config =
      explore::load_run_config(std::string(EXPLORE_CONFIG_DIR) +
                               "/default.json");
  // the spelled-out example is exactly the built-in defaults
  EXPECT_EQ(explore::to_json(config).dump(),
            explore::to_json(RunConfig{}).dump());
  const RunConfig reparsed =
      explore::run_config_from_json(explore::to_json(config));
  EXPECT_EQ(explore::to_json(reparsed).dump(),
            explore::to_json(config).dump());
}

TEST(Config, MissingFileThrowsConfigError) {
  EXPECT_THROW(explore::load_run_config("/nonexistent/config.json"),
               ConfigError);
}

TEST(Config, InvalidJsonFileThrowsConfigError) {
  const std::string path = ::testing::TempDir() + "bad_config.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  EXPECT_THROW(explore::load_run_config(path), ConfigError);
  std::remove(path.c_str());
}

TEST(Config, LoadsFromFile) {
  const std::string path = ::testing::TempDir() + "good_config.json";
  {
    std::ofstream out(path);
    out << R"({"world": {"num_users": 50, "steps": 5}, "seeds": [2]})";
  }
  const RunConfig config = explore::load_run_config(path);
  EXPECT_EQ(config.world.num_users, 50u);
  EXPECT_EQ(config.world.steps, 5u);
  EXPECT_EQ(config.seeds, (std::vector<uint64_t>{2}));
  std::remove(path.c_str());
}
