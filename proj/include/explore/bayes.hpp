#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "explore/errors.hpp"

namespace explore {

// Beta prior over an item's satisfaction rate: alpha pseudo-satisfactions,
// beta pseudo-dissatisfactions. Uniform by default; both are tuning knobs.
struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
};

inline void validate(const BetaPrior& prior) {
  if (!(prior.alpha > 0.0) || !std::isfinite(prior.alpha)) {
    throw DataError("beta prior alpha must be positive and finite, got " +
                    std::to_string(prior.alpha));
  }
  if (!(prior.beta > 0.0) || !std::isfinite(prior.beta)) {
    throw DataError("beta prior beta must be positive and finite, got " +
                    std::to_string(prior.beta));
  }
}

// Beta posterior over an item's satisfaction rate. Built from a prior plus
// observed counts via posterior_from(); with satisfactions S out of N
// impressions the parameters are (alpha0 + S, beta0 + N - S).
class BetaPosterior {
 public:
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  double mean() const { return alpha_ / (alpha_ + beta_); }

  double variance() const {
    const double s = alpha_ + beta_;
    return (alpha_ * beta_) / (s * s * (s + 1.0));
  }

  double std_dev() const { return std::sqrt(variance()); }

  friend BetaPosterior posterior_from(const BetaPrior& prior,
                                      uint64_t n_satisfied,
                                      uint64_t n_impressions);

 private:
  BetaPosterior(double alpha, double beta) : alpha_(alpha), beta_(beta) {}

  double alpha_;
  double beta_;
};

inline BetaPosterior posterior_from(const BetaPrior& prior,
                                    uint64_t n_satisfied,
                                    uint64_t n_impressions) {
  validate(prior);
  if (n_satisfied > n_impressions) {
    throw DataError("invalid counts: " + std::to_string(n_satisfied) +
                    " satisfactions exceed " + std::to_string(n_impressions) +
                    " impressions");
  }
  return BetaPosterior(
      prior.alpha + static_cast<double>(n_satisfied),
      prior.beta + static_cast<double>(n_impressions - n_satisfied));
}

// Outcome of the item-centric filter rule, with every input kept for audit
// logging. keep == (predicted >= threshold); equality keeps the item.
struct FilterDecision {
  bool keep = true;
  double predicted = 0.0;
  double posterior_mean = 0.0;
  double posterior_std = 0.0;
  double threshold = 0.0;  // posterior_mean - k * posterior_std
  double k = 0.0;
};

// Filters an item from a user's slate when the predicted user-item
// satisfaction falls strictly below mean - k * std of the item's own
// satisfaction-rate posterior. k = 0 degenerates to predicted < mean;
// k = infinity keeps everything.
inline FilterDecision should_filter(double predicted,
                                    const BetaPosterior& posterior,
                                    double k = 2.0) {
  if (!(predicted >= 0.0 && predicted <= 1.0)) {
    throw DataError("invalid score: predicted satisfaction must be in [0,1], got " +
                    std::to_string(predicted));
  }
  if (std::isnan(k) || k < 0.0) {
    throw DataError("invalid sigma multiplier: k must be >= 0, got " +
                    std::to_string(k));
  }
  FilterDecision decision;
  decision.predicted = predicted;
  decision.posterior_mean = posterior.mean();
  decision.posterior_std = posterior.std_dev();
  decision.k = k;
  decision.threshold = decision.posterior_mean - k * decision.posterior_std;
  decision.keep = !(predicted < decision.threshold);
  return decision;
}

}  // namespace explore
