#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "explore/audit.hpp"
#include "explore/errors.hpp"

namespace explore {

// One (predicted, outcome) pair from a slate audit log or a prediction CSV.
struct PredictionEvent {
  double predicted = 0.0;
  bool satisfied = false;
};

// Equal-width reliability bin over [0,1]. Rates are absent when the bin
// received no events, so plots keep a stable x-axis.
struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  uint64_t n = 0;
  std::optional<double> mean_predicted;
  std::optional<double> observed_rate;
};

// Bins events by predicted score and compares mean prediction to the
// empirical satisfaction rate per bin. predicted == 1 lands in the top bin.
inline std::vector<CalibrationBin> calibrate(
    const std::vector<PredictionEvent>& events, uint32_t num_bins) {
  if (num_bins < 2) {
    throw ConfigError("bins: must be >= 2, got " + std::to_string(num_bins));
  }
  std::vector<double> sum_predicted(num_bins, 0.0);
  std::vector<uint64_t> counts(num_bins, 0);
  std::vector<uint64_t> satisfied(num_bins, 0);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double p = events[i].predicted;
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DataError("record " + std::to_string(i) +
                      ": predicted score outside [0,1]: " + std::to_string(p));
    }
    std::size_t bin = static_cast<std::size_t>(p * num_bins);
    if (bin >= num_bins) bin = num_bins - 1;
    sum_predicted[bin] += p;
    counts[bin] += 1;
    satisfied[bin] += events[i].satisfied ? 1 : 0;
  }
  std::vector<CalibrationBin> bins(num_bins);
  for (uint32_t b = 0; b < num_bins; ++b) {
    bins[b].lower = static_cast<double>(b) / num_bins;
    bins[b].upper = static_cast<double>(b + 1) / num_bins;
    bins[b].n = counts[b];
    if (counts[b] > 0) {
      bins[b].mean_predicted =
          sum_predicted[b] / static_cast<double>(counts[b]);
      bins[b].observed_rate = static_cast<double>(satisfied[b]) /
                              static_cast<double>(counts[b]);
    }
  }
  return bins;
}

// Expected calibration error: impression-weighted mean absolute gap between
// mean prediction and observed rate over non-empty bins.
inline double calibration_summary(const std::vector<CalibrationBin>& bins) {
  uint64_t total = 0;
  double weighted = 0.0;
  for (const CalibrationBin& bin : bins) {
    if (bin.n == 0) continue;
    total += bin.n;
    weighted += static_cast<double>(bin.n) *
                std::abs(*bin.mean_predicted - *bin.observed_rate);
  }
  if (total == 0) {
    throw DataError("calibration summary undefined: all bins are empty");
  }
  return weighted / static_cast<double>(total);
}

// CSV: bin_lower,bin_upper,n,mean_predicted,observed_rate; absent rates are
// written as empty fields.
inline void write_calibration_csv(std::ostream& out,
                                  const std::vector<CalibrationBin>& bins) {
  out << "bin_lower,bin_upper,n,mean_predicted,observed_rate\n";
  out.precision(17);
  for (const CalibrationBin& bin : bins) {
    out << bin.lower << ',' << bin.upper << ',' << bin.n << ',';
    if (bin.mean_predicted) out << *bin.mean_predicted;
    out << ',';
    if (bin.observed_rate) out << *bin.observed_rate;
    out << '\n';
  }
  if (!out) throw IoError("failed writing calibration table");
}

// CSV input: header `predicted,satisfied`, satisfied as 0/1.
inline std::vector<PredictionEvent> read_prediction_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "predicted,satisfied") {
    throw DataError("line 1: expected header 'predicted,satisfied'");
  }
  std::vector<PredictionEvent> events;
  uint64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    PredictionEvent event;
    int flag = -1;
    char comma = 0;
    row >> event.predicted >> comma >> flag;
    if (!row || comma != ',' || (flag != 0 && flag != 1) ||
        (row >> std::ws, !row.eof())) {
      throw DataError("line " + std::to_string(line_no) + ": malformed row '" +
                      line + "'");
    }
    event.satisfied = flag == 1;
    events.push_back(event);
  }
  return events;
}

// Pulls (predicted, satisfied) pairs out of the shown entries of a slate
// audit log.
inline std::vector<PredictionEvent> prediction_events_from_audit(
    const std::vector<SlateRecord>& records) {
  std::vector<PredictionEvent> events;
  for (const SlateRecord& record : records) {
    for (const ShownItem& shown : record.shown) {
      events.push_back(PredictionEvent{shown.predicted, shown.satisfied});
    }
  }
  return events;
}

}  // namespace explore
