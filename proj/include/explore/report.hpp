#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "explore/config.hpp"
#include "explore/errors.hpp"
#include "explore/experiment.hpp"

namespace explore {

inline nlohmann::json to_json(const ArmMetrics& m) {
  return {{"users", m.users},
          {"items", m.items},
          {"exploration_impressions", m.exploration_impressions},
          {"satisfied_impressions", m.satisfied_impressions},
          {"satisfaction_rate", m.satisfaction_rate},
          {"recommendable_corpus", m.recommendable_corpus},
          {"corpus_per_impression", m.corpus_per_impression}};
}

inline nlohmann::json to_json(const DeltaReport& d) {
  return {{"satisfied_impressions", d.satisfied_impressions},
          {"satisfaction_rate", d.satisfaction_rate},
          {"exploration_impressions", d.exploration_impressions},
          {"recommendable_corpus", d.recommendable_corpus},
          {"corpus_per_impression", d.corpus_per_impression}};
}

inline nlohmann::json to_json(const AggregateEntry& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}};
}

inline nlohmann::json to_json(const DeltaAggregate& a) {
  return {{"satisfied_impressions", to_json(a.satisfied_impressions)},
          {"satisfaction_rate", to_json(a.satisfaction_rate)},
          {"exploration_impressions", to_json(a.exploration_impressions)},
          {"recommendable_corpus", to_json(a.recommendable_corpus)},
          {"corpus_per_impression", to_json(a.corpus_per_impression)}};
}

// The report embeds the experiment definition that produced it; identical
// config + seeds give a byte-identical document. Output paths are not part
// of the experiment and are left out of the echo.
inline nlohmann::json to_json(const ExperimentReport& report,
                              const RunConfig& config) {
  nlohmann::json per_seed = nlohmann::json::array();
  for (const SeedResult& r : report.per_seed) {
    per_seed.push_back({{"seed", r.seed},
                        {"control", to_json(r.control)},
                        {"treatment", to_json(r.treatment)},
                        {"deltas", to_json(r.deltas)}});
  }
  nlohmann::json config_echo = to_json(config);
  config_echo.erase("output");
  return {{"config", config_echo},
          {"per_seed", per_seed},
          {"aggregate", to_json(report.aggregate)}};
}

inline ArmMetrics arm_metrics_from_json(const nlohmann::json& j) {
  ArmMetrics m;
  j.at("users").get_to(m.users);
  j.at("items").get_to(m.items);
  j.at("exploration_impressions").get_to(m.exploration_impressions);
  j.at("satisfied_impressions").get_to(m.satisfied_impressions);
  j.at("satisfaction_rate").get_to(m.satisfaction_rate);
  j.at("recommendable_corpus").get_to(m.recommendable_corpus);
  j.at("corpus_per_impression").get_to(m.corpus_per_impression);
  return m;
}

inline DeltaReport delta_report_from_json(const nlohmann::json& j) {
  DeltaReport d;
  j.at("satisfied_impressions").get_to(d.satisfied_impressions);
  j.at("satisfaction_rate").get_to(d.satisfaction_rate);
  j.at("exploration_impressions").get_to(d.exploration_impressions);
  j.at("recommendable_corpus").get_to(d.recommendable_corpus);
  j.at("corpus_per_impression").get_to(d.corpus_per_impression);
  return d;
}

inline AggregateEntry aggregate_entry_from_json(const nlohmann::json& j) {
  AggregateEntry e;
  j.at("mean").get_to(e.mean);
  j.at("std_error").get_to(e.std_error);
  return e;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  try {
    ExperimentReport report;
    for (const auto& r : j.at("per_seed")) {
      SeedResult seed;
      r.at("seed").get_to(seed.seed);
      seed.control = arm_metrics_from_json(r.at("control"));
      seed.treatment = arm_metrics_from_json(r.at("treatment"));
      seed.deltas = delta_report_from_json(r.at("deltas"));
      report.per_seed.push_back(seed);
    }
    const nlohmann::json& agg = j.at("aggregate");
    report.aggregate.satisfied_impressions =
        aggregate_entry_from_json(agg.at("satisfied_impressions"));
    report.aggregate.satisfaction_rate =
        aggregate_entry_from_json(agg.at("satisfaction_rate"));
    report.aggregate.exploration_impressions =
        aggregate_entry_from_json(agg.at("exploration_impressions"));
    report.aggregate.recommendable_corpus =
        aggregate_entry_from_json(agg.at("recommendable_corpus"));
    report.aggregate.corpus_per_impression =
        aggregate_entry_from_json(agg.at("corpus_per_impression"));
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

namespace detail {

inline std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

inline std::string percent(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.2f%%", 100.0 * value);
  return buf;
}

inline void table_row(std::ostream& out, const std::string& name,
                      const std::string& control, const std::string& treatment,
                      const std::string& delta) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-26s %16s %16s %22s\n", name.c_str(),
                control.c_str(), treatment.c_str(), delta.c_str());
  out << buf;
}

}  // namespace detail

// Aligned human-readable summary: per-arm means over seeds plus mean
// relative deltas with their standard errors.
inline void write_report_table(std::ostream& out,
                               const ExperimentReport& report) {
  const std::size_t n = report.per_seed.size();
  out << "co-diverted experiment, " << n << (n == 1 ? " seed\n" : " seeds\n");
  detail::table_row(out, "metric", "control", "treatment",
                    "delta (mean +/- se)");
  if (n == 0) return;

  const auto mean_of = [&](auto field, bool treatment_arm) {
    double sum = 0.0;
    for (const SeedResult& r : report.per_seed) {
      sum += static_cast<double>((treatment_arm ? r.treatment : r.control).*field);
    }
    return sum / static_cast<double>(n);
  };
  const auto row = [&](const std::string& name, auto field,
                       const AggregateEntry& agg, int digits) {
    detail::table_row(out, name, detail::fixed(mean_of(field, false), digits),
                      detail::fixed(mean_of(field, true), digits),
                      detail::percent(agg.mean) + " +/- " +
                          detail::fixed(100.0 * agg.std_error, 2) + "%");
  };

  row("satisfied_impressions", &ArmMetrics::satisfied_impressions,
      report.aggregate.satisfied_impressions, 1);
  row("satisfaction_rate", &ArmMetrics::satisfaction_rate,
      report.aggregate.satisfaction_rate, 4);
  row("exploration_impressions", &ArmMetrics::exploration_impressions,
      report.aggregate.exploration_impressions, 1);
  row("recommendable_corpus", &ArmMetrics::recommendable_corpus,
      report.aggregate.recommendable_corpus, 1);
  row("corpus_per_impression", &ArmMetrics::corpus_per_impression,
      report.aggregate.corpus_per_impression, 6);
}

}  // namespace explore
