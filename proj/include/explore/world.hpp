#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "explore/errors.hpp"
#include "explore/rng.hpp"
#include "explore/stats_store.hpp"

namespace explore {

// Stand-in for the production ranking head: how predicted satisfaction is
// distorted relative to ground truth. kPower raises true_p to `param`
// (gamma < 1 overestimates low rates, gamma > 1 underestimates them);
// kAdditiveNoise adds seeded Gaussian noise of stddev `param` and clamps.
struct MiscalibrationSpec {
  enum class Mode { kIdentity, kPower, kAdditiveNoise };
  Mode mode = Mode::kIdentity;
  double param = 0.0;
};

struct WorldConfig {
  uint32_t num_users = 2000;
  uint32_t dim = 16;
  uint32_t num_clusters = 8;
  uint32_t items_per_step = 4;
  uint32_t steps = 250;
  double logit_scale = 2.0;
  double quality_offset_mean = -3.2;
  double quality_offset_std = 1.0;
  MiscalibrationSpec miscalibration;
  uint64_t seed = 1;
};

inline void validate(const WorldConfig& config) {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("world." + field + ": " + why);
  };
  if (config.num_users == 0) fail("num_users", "must be positive");
  if (config.dim == 0) fail("dim", "must be >= 1");
  if (config.num_clusters == 0) fail("num_clusters", "must be positive");
  if (config.items_per_step == 0) fail("items_per_step", "must be positive");
  if (!(config.logit_scale > 0.0) || !std::isfinite(config.logit_scale)) {
    fail("logit_scale", "must be positive and finite");
  }
  if (!std::isfinite(config.quality_offset_mean)) {
    fail("quality_offset_mean", "must be finite");
  }
  if (!(config.quality_offset_std >= 0.0) ||
      !std::isfinite(config.quality_offset_std)) {
    fail("quality_offset_std", "must be >= 0 and finite");
  }
  switch (config.miscalibration.mode) {
    case MiscalibrationSpec::Mode::kIdentity:
      break;
    case MiscalibrationSpec::Mode::kPower:
      if (!(config.miscalibration.param > 0.0) ||
          !std::isfinite(config.miscalibration.param)) {
        fail("miscalibration.param", "power exponent must be positive");
      }
      break;
    case MiscalibrationSpec::Mode::kAdditiveNoise:
      if (!(config.miscalibration.param >= 0.0) ||
          !std::isfinite(config.miscalibration.param)) {
        fail("miscalibration.param", "noise stddev must be >= 0");
      }
      break;
  }
}

struct UserProfile {
  uint64_t id = 0;
  std::vector<double> interests;
};

struct ItemProfile {
  ItemId id = 0;
  std::vector<double> topics;
  double quality_offset = 0.0;
  uint32_t birth_step = 0;
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Synthetic population with ground-truth satisfaction probabilities. Interest
// and topic vectors are drawn around shared cluster centers so items have
// right and wrong audiences; an item's quality offset shifts its rate for
// every audience. Ground truth is
//   true_p = logistic(logit_scale * <interests, topics> + quality_offset)
// and predictions are true_p passed through the miscalibration spec.
class World {
 public:
  static World generate(const WorldConfig& config) {
    validate(config);
    World world;
    world.config_ = config;
    Rng rng(derive_seed(config.seed, "world"));

    std::vector<std::vector<double>> centers(config.num_clusters);
    for (auto& center : centers) center = unit_vector(rng, config.dim);

    world.users_.reserve(config.num_users);
    for (uint32_t u = 0; u < config.num_users; ++u) {
      UserProfile user;
      user.id = u;
      user.interests =
          around_center(rng, centers[rng.below(config.num_clusters)]);
      world.users_.push_back(std::move(user));
    }

    const uint64_t total_items =
        static_cast<uint64_t>(config.items_per_step) * config.steps;
    world.items_.reserve(total_items);
    for (uint32_t step = 0; step < config.steps; ++step) {
      for (uint32_t j = 0; j < config.items_per_step; ++j) {
        ItemProfile item;
        item.id = world.items_.size();
        item.topics =
            around_center(rng, centers[rng.below(config.num_clusters)]);
        item.quality_offset = rng.normal(config.quality_offset_mean,
                                         config.quality_offset_std);
        item.birth_step = step;
        world.items_.push_back(std::move(item));
      }
    }
    return world;
  }

  const WorldConfig& config() const { return config_; }
  const std::vector<UserProfile>& users() const { return users_; }
  // Ascending by birth_step, then id: a cold-start stream.
  const std::vector<ItemProfile>& items() const { return items_; }

  double true_satisfaction(const UserProfile& user,
                           const ItemProfile& item) const {
    if (user.interests.size() != item.topics.size()) {
      throw DataError("dimension mismatch: user " + std::to_string(user.id) +
                      " has dim " + std::to_string(user.interests.size()) +
                      ", item " + std::to_string(item.id) + " has dim " +
                      std::to_string(item.topics.size()));
    }
    double dot = 0.0;
    for (std::size_t d = 0; d < user.interests.size(); ++d) {
      dot += user.interests[d] * item.topics[d];
    }
    return logistic(config_.logit_scale * dot + item.quality_offset);
  }

  // Predicted p(satisfied | user, item) as the simulated ranking head would
  // emit it. Pure in (user, item, world seed): safe to cache.
  double predict(const UserProfile& user, const ItemProfile& item) const {
    const double p = true_satisfaction(user, item);
    switch (config_.miscalibration.mode) {
      case MiscalibrationSpec::Mode::kIdentity:
        return p;
      case MiscalibrationSpec::Mode::kPower:
        return std::pow(p, config_.miscalibration.param);
      case MiscalibrationSpec::Mode::kAdditiveNoise: {
        const uint64_t noise_seed =
            derive_seed(config_.seed, "miscal", user.id, item.id);
        Rng noise(noise_seed);
        const double shifted =
            p + noise.normal(0.0, config_.miscalibration.param);
        return std::min(1.0, std::max(0.0, shifted));
      }
    }
    return p;
  }

  bool sample_outcome(const UserProfile& user, const ItemProfile& item,
                      Rng& rng) const {
    return rng.bernoulli(true_satisfaction(user, item));
  }

 private:
  static std::vector<double> unit_vector(Rng& rng, uint32_t dim) {
    std::vector<double> v(dim);
    double norm2 = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm2 += x * x;
    }
    const double norm = std::sqrt(norm2);
    if (norm > 0.0) {
      for (double& x : v) x /= norm;
    } else {
      v[0] = 1.0;  // astronomically unlikely, but keep the vector unit-length
    }
    return v;
  }

  // Cluster member: center plus Gaussian jitter, re-normalized. The jitter
  // scale fixes how tight audiences are around their cluster.
  static std::vector<double> around_center(Rng& rng,
                                           const std::vector<double>& center) {
    constexpr double kClusterJitter = 0.25;
    std::vector<double> v(center.size());
    double norm2 = 0.0;
    for (std::size_t d = 0; d < v.size(); ++d) {
      v[d] = center[d] + kClusterJitter * rng.normal();
      norm2 += v[d] * v[d];
    }
    const double norm = std::sqrt(norm2);
    for (double& x : v) x /= norm;
    return v;
  }

  WorldConfig config_;
  std::vector<UserProfile> users_;
  std::vector<ItemProfile> items_;
};

}  // namespace explore
