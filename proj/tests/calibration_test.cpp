#include "explore/calibration.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "explore/rng.hpp"
#include "explore/world.hpp"

using explore::CalibrationBin;
using explore::ConfigError;
using explore::DataError;
using explore::PredictionEvent;
using explore::Rng;
using explore::World;
using explore::WorldConfig;

namespace {

// identity-mode events straight from a synthetic world
std::vector<PredictionEvent> simulated_events(std::size_t count,
                                              explore::MiscalibrationSpec spec,
                                              uint64_t seed) {
  WorldConfig config;
  config.num_users = 200;
  config.items_per_step = 10;
  config.steps = 20;
  config.miscalibration = spec;
  config.seed = seed;
  const World world = World::generate(config);
  Rng rng(explore::derive_seed(seed, "events"));
  std::vector<PredictionEvent> events;
  events.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& user = world.users()[rng.below(world.users().size())];
    const auto& item = world.items()[rng.below(world.items().size())];
    events.push_back(PredictionEvent{world.predict(user, item),
                                     world.sample_outcome(user, item, rng)});
  }
  return events;
}

}  // namespace

TEST(Calibrate, DiagonalWithExactEvents) {
  std::vector<PredictionEvent> events;
  for (int i = 0; i < 10; ++i) {
    events.push_back({1.0, true});
    events.push_back({0.0, false});
  }
  const auto bins = explore::calibrate(events, 2);
  ASSERT_EQ(bins.size(), 2u);
  EXPECT_EQ(bins[0].n, 10u);
  EXPECT_DOUBLE_EQ(*bins[0].mean_predicted, 0.0);
  EXPECT_DOUBLE_EQ(*bins[0].observed_rate, 0.0);
  EXPECT_EQ(bins[1].n, 10u);
  EXPECT_DOUBLE_EQ(*bins[1].mean_predicted, 1.0);
  EXPECT_DOUBLE_EQ(*bins[1].observed_rate, 1.0);
}

TEST(Calibrate, NoEventsGiveEmptyBins) {
  const auto bins = explore::calibrate({}, 5);
  ASSERT_EQ(bins.size(), 5u);
  for (const CalibrationBin& bin : bins) {
    EXPECT_EQ(bin.n, 0u);
    EXPECT_FALSE(bin.mean_predicted.has_value());
    EXPECT_FALSE(bin.observed_rate.has_value());
  }
}

TEST(Calibrate, RejectsFewerThanTwoBins) {
  EXPECT_THROW(explore::calibrate({}, 1), ConfigError);
}

TEST(Calibrate, RejectsOutOfRangePredictionCitingRecord) {
  std::vector<PredictionEvent> events{{0.5, true}, {1.5, false}};
  try {
    explore::calibrate(events, 4);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos);
  }
}

TEST(Calibrate, BinPopulationsSumToEventCount) {
  Rng rng(8);
  std::vector<PredictionEvent> events;
  for (int i = 0; i < 5000; ++i) {
    events.push_back({rng.uniform01(), rng.bernoulli(0.5)});
  }
  const auto bins = explore::calibrate(events, 13);
  uint64_t total = 0;
  for (const CalibrationBin& bin : bins) total += bin.n;
  EXPECT_EQ(total, events.size());
}

TEST(Calibrate, TopEdgeLandsInLastBin) {
  const auto bins = explore::calibrate({{1.0, true}}, 10);
  EXPECT_EQ(bins[9].n, 1u);
  EXPECT_LE(*bins[9].mean_predicted, bins[9].upper);
  EXPECT_GE(*bins[9].mean_predicted, bins[9].lower);
}

TEST(Calibrate, MeanPredictedStaysInsideBinBounds) {
  const auto events = simulated_events(20000, {}, 4);
  for (const CalibrationBin& bin : explore::calibrate(events, 10)) {
    if (bin.n == 0) continue;
    EXPECT_GE(*bin.mean_predicted, bin.lower);
    EXPECT_LE(*bin.mean_predicted, bin.upper);
  }
}

TEST(Calibrate, IdentityModeTracksDiagonal) {
  const auto events = simulated_events(100000, {}, 21);
  const auto bins = explore::calibrate(events, 10);
  for (const CalibrationBin& bin : bins) {
    if (bin.n < 100) continue;  // sampling error explodes in sparse bins
    EXPECT_LE(std::abs(*bin.mean_predicted - *bin.observed_rate), 0.02)
        << "bin [" << bin.lower << "," << bin.upper << ") n=" << bin.n;
  }
}

TEST(CalibrationSummary, PerfectDiagonalIsZero) {
  std::vector<PredictionEvent> events;
  for (int i = 0; i < 10; ++i) {
    events.push_back({1.0, true});
    events.push_back({0.0, false});
  }
  EXPECT_DOUBLE_EQ(explore::calibration_summary(explore::calibrate(events, 2)),
                   0.0);
}

TEST(CalibrationSummary, SingleBinGap) {
  std::vector<CalibrationBin> bins(1);
  bins[0].lower = 0.0;
  bins[0].upper = 1.0;
  bins[0].n = 10;
  bins[0].mean_predicted = 0.2;
  bins[0].observed_rate = 0.3;
  EXPECT_NEAR(explore::calibration_summary(bins), 0.1, 1e-15);
}

TEST(CalibrationSummary, AllBinsEmptyThrows) {
  EXPECT_THROW(explore::calibration_summary(explore::calibrate({}, 4)),
               DataError);
}

TEST(CalibrationSummary, MiscalibratedWorldScoresWorseThanIdentity) {
  const auto identity_events = simulated_events(80000, {}, 33);
  const auto power_events = simulated_events(
      80000, {explore::MiscalibrationSpec::Mode::kPower, 0.8}, 33);
  const double identity_ece =
      explore::calibration_summary(explore::calibrate(identity_events, 10));
  const double power_ece =
      explore::calibration_summary(explore::calibrate(power_events, 10));
  EXPECT_GT(power_ece, identity_ece);
}

TEST(CalibrationCsv, WritesAbsentRatesAsEmptyFields) {
  const auto bins = explore::calibrate({{0.95, true}}, 2);
  std::ostringstream out;
  explore::write_calibration_csv(out, bins);
  const std::string text = out.str();
  EXPECT_EQ(text.find("bin_lower,bin_upper,n,mean_predicted,observed_rate\n"),
            0u);
  EXPECT_NE(text.find("0,0.5,0,,\n"), std::string::npos);
}

TEST(PredictionCsv, RoundTripsThroughReader) {
  std::istringstream in(
      "predicted,satisfied\n"
      "0.25,1\n"
      "0.75,0\n");
  const auto events = explore::read_prediction_csv(in);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_DOUBLE_EQ(events[0].predicted, 0.25);
  EXPECT_TRUE(events[0].satisfied);
  EXPECT_FALSE(events[1].satisfied);
}

TEST(PredictionCsv, RejectsMalformedRows) {
  for (const char* body : {"0.5\n", "0.5,2\n", "x,1\n"}) {
    std::istringstream in(std::string("predicted,satisfied\n") + body);
    EXPECT_THROW(explore::read_prediction_csv(in), DataError) << body;
  }
}

TEST(AuditEvents, ExtractShownPairs) {
  explore::SlateRecord record;
  record.step = 0;
  record.arm = "treatment";
  record.user_id = 4;
  record.shown.push_back({11, 0.4, 0.3, 0.1, true, true});
  record.shown.push_back({12, 0.2, 0.3, 0.1, true, false});
  record.filtered.push_back({13, 0.1, 0.5, 0.05});
  const auto events = explore::prediction_events_from_audit({record});
  ASSERT_EQ(events.size(), 2u);
  EXPECT_DOUBLE_EQ(events[0].predicted, 0.4);
  EXPECT_TRUE(events[0].satisfied);
  EXPECT_DOUBLE_EQ(events[1].predicted, 0.2);
  EXPECT_FALSE(events[1].satisfied);
}
