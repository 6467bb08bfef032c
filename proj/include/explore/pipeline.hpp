#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "explore/bayes.hpp"
#include "explore/errors.hpp"
#include "explore/rng.hpp"
#include "explore/stats_store.hpp"
#include "explore/world.hpp"

namespace explore {

// When an item leaves exploration: after min_impressions, its posterior mean
// decides between the recommendable corpus and retirement.
struct GraduationRule {
  uint64_t min_impressions = 200;
  double min_posterior_mean = 0.1;
};

struct ServePolicy {
  bool filter_enabled = true;
  double k = 2.0;               // sigma multiplier in the filter rule
  uint32_t retrieval_size = 2;  // M candidates fetched per request
  uint32_t slate_size = 2;      // L items shown, L <= M
  GraduationRule graduation;
  BetaPrior prior;
  // With step-boundary visibility, filter and graduation decisions read
  // counters frozen at the start of the step instead of live ones, which
  // makes serves within a step order-independent (config key: parallel).
  bool step_boundary_visibility = false;
};

inline void validate(const ServePolicy& policy, const std::string& prefix) {
  const auto fail = [&](const std::string& field, const std::string& why) {
    throw ConfigError(prefix + "." + field + ": " + why);
  };
  if (std::isnan(policy.k) || policy.k < 0.0) fail("k", "must be >= 0");
  if (policy.slate_size == 0) fail("slate_size", "must be >= 1");
  if (policy.retrieval_size < policy.slate_size) {
    fail("retrieval_size", "must be >= slate_size");
  }
  if (policy.graduation.min_impressions == 0) {
    fail("graduation.min_impressions", "must be >= 1");
  }
  if (!(policy.graduation.min_posterior_mean >= 0.0 &&
        policy.graduation.min_posterior_mean <= 1.0)) {
    fail("graduation.min_posterior_mean", "must be in [0,1]");
  }
  if (!(policy.prior.alpha > 0.0) || !std::isfinite(policy.prior.alpha)) {
    fail("prior.alpha", "must be positive and finite");
  }
  if (!(policy.prior.beta > 0.0) || !std::isfinite(policy.prior.beta)) {
    fail("prior.beta", "must be positive and finite");
  }
}

enum class ItemState { kActive, kGraduated, kRetired };

inline ItemState graduate_check(const ItemStats& stats,
                                const GraduationRule& rule,
                                const BetaPrior& prior) {
  if (stats.impressions < rule.min_impressions) return ItemState::kActive;
  const double mean =
      posterior_from(prior, stats.satisfactions, stats.impressions).mean();
  return mean >= rule.min_posterior_mean ? ItemState::kGraduated
                                         : ItemState::kRetired;
}

struct Candidate {
  ItemId item_id = 0;
  double predicted = 0.0;
};

struct ShownItem {
  ItemId item_id = 0;
  double predicted = 0.0;
  double posterior_mean = 0.0;
  double posterior_std = 0.0;
  bool kept = true;
  bool satisfied = false;
};

struct FilteredItem {
  ItemId item_id = 0;
  double predicted = 0.0;
  double posterior_mean = 0.0;
  double posterior_std = 0.0;
};

// Audit record of one serve call.
struct SlateRecord {
  uint32_t step = 0;
  std::string arm;
  uint64_t user_id = 0;
  std::vector<ShownItem> shown;
  std::vector<FilteredItem> filtered;
};

// Per-request serving path over one arm's users and items: retrieve the
// top-M active items by predicted score, apply the item-centric filter, show
// the top-L survivors, sample outcomes, and record them. Items graduate into
// the recommendable corpus or retire once they clear the impression
// threshold; filtered items consume no impression.
//
// Outcomes are drawn by hashing (seed, user, item, step), so a replay is
// identical no matter how requests are interleaved.
class ExplorationPipeline {
 public:
  ExplorationPipeline(const World& world, ServePolicy policy, std::string arm,
                      std::vector<uint32_t> user_indices, uint64_t seed)
      : world_(&world),
        policy_(std::move(policy)),
        arm_(std::move(arm)),
        users_(std::move(user_indices)),
        outcome_seed_(derive_seed(seed, "outcome")) {
    validate(policy_, "policy");
  }

  const ServePolicy& policy() const { return policy_; }
  const std::string& arm() const { return arm_; }
  const std::vector<uint32_t>& user_indices() const { return users_; }

  StatsStore& stats() { return stats_; }
  const StatsStore& stats() const { return stats_; }

  // Item enters the exploration pool with zero history. Predicted scores for
  // the arm's users are computed once here; predict() is pure.
  void admit(const ItemProfile& item) {
    TrackedItem tracked;
    tracked.item = &item;
    tracked.state = ItemState::kActive;
    tracked.predicted.reserve(users_.size());
    tracked.true_p.reserve(users_.size());
    for (uint32_t u : users_) {
      const UserProfile& user = world_->users()[u];
      tracked.predicted.push_back(world_->predict(user, item));
      tracked.true_p.push_back(world_->true_satisfaction(user, item));
    }
    index_by_id_[item.id] = items_.size();
    active_.push_back(items_.size());
    items_.push_back(std::move(tracked));
  }

  // Marks the beginning of a simulation step. Under step-boundary
  // visibility this is where state transitions are applied and the counters
  // used by serve() are frozen.
  void begin_step(uint32_t step) {
    current_step_ = step;
    if (!policy_.step_boundary_visibility) return;
    apply_boundary_transitions();
    for (std::size_t idx : active_) {
      items_[idx].frozen = stats_.snapshot(items_[idx].item->id);
    }
  }

  // Top-M active items for this user by predicted score, ties broken by
  // ascending item id. user_pos indexes this arm's user list.
  std::vector<Candidate> retrieve(std::size_t user_pos, uint32_t m) const {
    std::vector<Candidate> out;
    if (m == 0) return out;
    // single pass; heap root is the worst of the current top-M
    std::vector<std::pair<double, ItemId>> heap;
    heap.reserve(std::min<std::size_t>(m, active_.size()));
    const auto better = [](const std::pair<double, ItemId>& a,
                           const std::pair<double, ItemId>& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    };
    for (std::size_t idx : active_) {
      std::pair<double, ItemId> entry{items_[idx].predicted[user_pos],
                                      items_[idx].item->id};
      if (heap.size() < m) {
        heap.push_back(entry);
        std::push_heap(heap.begin(), heap.end(), better);
      } else if (better(entry, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), better);
        heap.back() = entry;
        std::push_heap(heap.begin(), heap.end(), better);
      }
    }
    std::sort_heap(heap.begin(), heap.end(), better);
    out.reserve(heap.size());
    for (const auto& [score, id] : heap) out.push_back(Candidate{id, score});
    return out;
  }

  // One request for one user: rank, filter, show, sample, record.
  SlateRecord serve(std::size_t user_pos) {
    SlateRecord record;
    record.step = current_step_;
    record.arm = arm_;
    record.user_id = world_->users()[users_[user_pos]].id;

    const std::vector<Candidate> candidates =
        retrieve(user_pos, policy_.retrieval_size);
    for (const Candidate& candidate : candidates) {
      if (record.shown.size() >= policy_.slate_size) break;
      const std::size_t idx = index_by_id_.at(candidate.item_id);
      const ItemStats stats = visible_stats(idx);
      const BetaPosterior posterior =
          posterior_from(policy_.prior, stats.satisfactions, stats.impressions);
      const FilterDecision decision =
          should_filter(candidate.predicted, posterior, policy_.k);
      if (policy_.filter_enabled && !decision.keep) {
        record.filtered.push_back(FilteredItem{candidate.item_id,
                                               decision.predicted,
                                               decision.posterior_mean,
                                               decision.posterior_std});
        continue;
      }
      ShownItem shown;
      shown.item_id = candidate.item_id;
      shown.predicted = decision.predicted;
      shown.posterior_mean = decision.posterior_mean;
      shown.posterior_std = decision.posterior_std;
      shown.kept = true;
      shown.satisfied = draw_outcome(idx, user_pos);
      stats_.record(candidate.item_id, shown.satisfied);
      record.shown.push_back(shown);
      if (!policy_.step_boundary_visibility) {
        maybe_transition(idx, stats_.snapshot(candidate.item_id));
      }
    }
    return record;
  }

  ItemState state(ItemId id) const {
    return items_[index_by_id_.at(id)].state;
  }

  std::size_t admitted_count() const { return items_.size(); }
  std::size_t active_count() const { return active_.size(); }
  std::size_t graduated_count() const { return graduated_count_; }
  std::size_t retired_count() const { return retired_count_; }

  std::vector<ItemId> items_in_state(ItemState state) const {
    std::vector<ItemId> ids;
    for (const TrackedItem& tracked : items_) {
      if (tracked.state == state) ids.push_back(tracked.item->id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

 private:
  struct TrackedItem {
    const ItemProfile* item = nullptr;
    ItemState state = ItemState::kActive;
    std::vector<double> predicted;  // per arm-user, filled at admit()
    std::vector<double> true_p;
    ItemStats frozen;  // step-boundary snapshot when enabled
  };

  ItemStats visible_stats(std::size_t idx) const {
    return policy_.step_boundary_visibility
               ? items_[idx].frozen
               : stats_.snapshot(items_[idx].item->id);
  }

  bool draw_outcome(std::size_t idx, std::size_t user_pos) {
    const uint64_t key =
        derive_seed(outcome_seed_, "draw",
                    world_->users()[users_[user_pos]].id,
                    items_[idx].item->id);
    return unit_hash(key, current_step_) < items_[idx].true_p[user_pos];
  }

  void maybe_transition(std::size_t idx, const ItemStats& stats) {
    const ItemState next =
        graduate_check(stats, policy_.graduation, policy_.prior);
    if (next == ItemState::kActive) return;
    items_[idx].state = next;
    (next == ItemState::kGraduated ? graduated_count_ : retired_count_)++;
    active_.erase(std::remove(active_.begin(), active_.end(), idx),
                  active_.end());
  }

  void apply_boundary_transitions() {
    std::vector<std::size_t> still_active;
    still_active.reserve(active_.size());
    for (std::size_t idx : active_) {
      const ItemState next =
          graduate_check(stats_.snapshot(items_[idx].item->id),
                         policy_.graduation, policy_.prior);
      if (next == ItemState::kActive) {
        still_active.push_back(idx);
      } else {
        items_[idx].state = next;
        (next == ItemState::kGraduated ? graduated_count_ : retired_count_)++;
      }
    }
    active_.swap(still_active);
  }

  const World* world_;
  ServePolicy policy_;
  std::string arm_;
  std::vector<uint32_t> users_;  // indices into world_->users()
  uint64_t outcome_seed_;
  StatsStore stats_;
  std::vector<TrackedItem> items_;
  std::unordered_map<ItemId, std::size_t> index_by_id_;
  std::vector<std::size_t> active_;
  std::size_t graduated_count_ = 0;
  std::size_t retired_count_ = 0;
  uint32_t current_step_ = 0;
};

}  // namespace explore
