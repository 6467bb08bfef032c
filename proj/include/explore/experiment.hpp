#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "explore/audit.hpp"
#include "explore/config.hpp"
#include "explore/errors.hpp"
#include "explore/pipeline.hpp"
#include "explore/rng.hpp"
#include "explore/world.hpp"

namespace explore {

// Disjoint user and item arms for a user-corpus co-diverted experiment:
// treatment users are served only treatment items under the treatment
// policy, control users only control items under the control policy, so
// corpus-level effects are measurable alongside user metrics.
struct Diversion {
  std::vector<uint32_t> control_users;  // indices into world.users()
  std::vector<uint32_t> treatment_users;
  std::vector<uint32_t> control_items;  // indices into world.items()
  std::vector<uint32_t> treatment_items;
};

inline Diversion divert(const World& world, const DiversionConfig& config,
                        uint64_t seed) {
  validate(config);
  Diversion diversion;
  const uint64_t user_seed = derive_seed(seed, "user-arm");
  const uint64_t item_seed = derive_seed(seed, "item-arm");
  for (uint32_t u = 0; u < world.users().size(); ++u) {
    const bool treated =
        unit_hash(user_seed, world.users()[u].id) < config.user_fraction;
    (treated ? diversion.treatment_users : diversion.control_users).push_back(u);
  }
  for (uint32_t i = 0; i < world.items().size(); ++i) {
    const bool treated =
        unit_hash(item_seed, world.items()[i].id) < config.item_fraction;
    (treated ? diversion.treatment_items : diversion.control_items).push_back(i);
  }
  if (!world.users().empty() &&
      (diversion.control_users.empty() || diversion.treatment_users.empty())) {
    throw ConfigError("diversion produced an empty user arm");
  }
  if (!world.items().empty() &&
      (diversion.control_items.empty() || diversion.treatment_items.empty())) {
    throw ConfigError("diversion produced an empty item arm");
  }
  return diversion;
}

struct ArmMetrics {
  uint64_t users = 0;
  uint64_t items = 0;  // cold-start items admitted to the arm over the run
  uint64_t exploration_impressions = 0;
  uint64_t satisfied_impressions = 0;
  double satisfaction_rate = 0.0;  // satisfied / impressions, 0 when empty
  uint64_t recommendable_corpus = 0;  // graduated items at run end
  double corpus_per_impression = 0.0;
};

// Relative deltas treatment vs control, (T - C) / C; 0 when C is 0.
struct DeltaReport {
  double satisfied_impressions = 0.0;
  double satisfaction_rate = 0.0;
  double exploration_impressions = 0.0;
  double recommendable_corpus = 0.0;
  double corpus_per_impression = 0.0;
};

inline double relative_delta(double treatment, double control) {
  if (control == 0.0) return 0.0;
  return (treatment - control) / control;
}

inline DeltaReport compute_deltas(const ArmMetrics& control,
                                  const ArmMetrics& treatment) {
  DeltaReport deltas;
  deltas.satisfied_impressions =
      relative_delta(static_cast<double>(treatment.satisfied_impressions),
                     static_cast<double>(control.satisfied_impressions));
  deltas.satisfaction_rate =
      relative_delta(treatment.satisfaction_rate, control.satisfaction_rate);
  deltas.exploration_impressions =
      relative_delta(static_cast<double>(treatment.exploration_impressions),
                     static_cast<double>(control.exploration_impressions));
  deltas.recommendable_corpus =
      relative_delta(static_cast<double>(treatment.recommendable_corpus),
                     static_cast<double>(control.recommendable_corpus));
  deltas.corpus_per_impression = relative_delta(
      treatment.corpus_per_impression, control.corpus_per_impression);
  return deltas;
}

struct SeedResult {
  uint64_t seed = 0;
  ArmMetrics control;
  ArmMetrics treatment;
  DeltaReport deltas;
};

struct AggregateEntry {
  double mean = 0.0;
  double std_error = 0.0;
};

struct DeltaAggregate {
  AggregateEntry satisfied_impressions;
  AggregateEntry satisfaction_rate;
  AggregateEntry exploration_impressions;
  AggregateEntry recommendable_corpus;
  AggregateEntry corpus_per_impression;
};

struct ExperimentReport {
  std::vector<SeedResult> per_seed;
  DeltaAggregate aggregate;
};

namespace detail {

inline AggregateEntry aggregate_of(const std::vector<SeedResult>& results,
                                   double DeltaReport::* field) {
  AggregateEntry entry;
  const double n = static_cast<double>(results.size());
  if (results.empty()) return entry;
  double sum = 0.0;
  for (const SeedResult& r : results) sum += r.deltas.*field;
  entry.mean = sum / n;
  if (results.size() > 1) {
    double ss = 0.0;
    for (const SeedResult& r : results) {
      const double d = r.deltas.*field - entry.mean;
      ss += d * d;
    }
    entry.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return entry;
}

}  // namespace detail

inline DeltaAggregate aggregate_deltas(const std::vector<SeedResult>& results) {
  DeltaAggregate agg;
  agg.satisfied_impressions =
      detail::aggregate_of(results, &DeltaReport::satisfied_impressions);
  agg.satisfaction_rate =
      detail::aggregate_of(results, &DeltaReport::satisfaction_rate);
  agg.exploration_impressions =
      detail::aggregate_of(results, &DeltaReport::exploration_impressions);
  agg.recommendable_corpus =
      detail::aggregate_of(results, &DeltaReport::recommendable_corpus);
  agg.corpus_per_impression =
      detail::aggregate_of(results, &DeltaReport::corpus_per_impression);
  return agg;
}

// One arm of one seeded run.
class ArmRun {
 public:
  ArmRun(const World& world, ServePolicy policy, std::string arm,
         std::vector<uint32_t> user_indices, std::vector<uint32_t> item_indices,
         uint64_t seed, std::ostream* audit)
      : pipeline_(world, std::move(policy), std::move(arm), std::move(user_indices),
                  seed),
        world_(&world),
        item_indices_(std::move(item_indices)),
        audit_(audit) {}

  void run_step(uint32_t step) {
    const auto& items = world_->items();
    while (next_item_ < item_indices_.size() &&
           items[item_indices_[next_item_]].birth_step <= step) {
      pipeline_.admit(items[item_indices_[next_item_]]);
      ++next_item_;
    }
    pipeline_.begin_step(step);
    for (std::size_t pos = 0; pos < pipeline_.user_indices().size(); ++pos) {
      const SlateRecord record = pipeline_.serve(pos);
      slate_impressions_ += record.shown.size();
      if (audit_) write_audit_line(*audit_, record);
    }
  }

  ArmMetrics metrics() const {
    ArmMetrics m;
    m.users = pipeline_.user_indices().size();
    m.items = pipeline_.admitted_count();
    const ItemStats totals = pipeline_.stats().totals();
    m.exploration_impressions = totals.impressions;
    m.satisfied_impressions = totals.satisfactions;
    m.satisfaction_rate =
        totals.impressions == 0
            ? 0.0
            : static_cast<double>(totals.satisfactions) /
                  static_cast<double>(totals.impressions);
    m.recommendable_corpus = pipeline_.graduated_count();
    m.corpus_per_impression =
        totals.impressions == 0
            ? 0.0
            : static_cast<double>(m.recommendable_corpus) /
                  static_cast<double>(totals.impressions);
    return m;
  }

  ExplorationPipeline& pipeline() { return pipeline_; }
  uint64_t slate_impressions() const { return slate_impressions_; }

 private:
  ExplorationPipeline pipeline_;
  const World* world_;
  std::vector<uint32_t> item_indices_;
  std::ostream* audit_;
  uint64_t slate_impressions_ = 0;
  std::size_t next_item_ = 0;
};

// Simulates one seed: a fresh world, a co-diverted split, and both arms run
// for world.steps rounds with every user issuing one request per step.
inline SeedResult run_seed(const RunConfig& config, uint64_t seed,
                           std::ostream* control_audit = nullptr,
                           std::ostream* treatment_audit = nullptr) {
  WorldConfig world_config = config.world;
  world_config.seed = derive_seed(seed, "world");
  const World world = World::generate(world_config);
  const Diversion diversion =
      divert(world, config.diversion, derive_seed(seed, "divert"));

  ServePolicy control_policy = config.control;
  ServePolicy treatment_policy = config.treatment;
  control_policy.step_boundary_visibility |= config.parallel;
  treatment_policy.step_boundary_visibility |= config.parallel;

  ArmRun control(world, control_policy, "control", diversion.control_users,
                 diversion.control_items, derive_seed(seed, "control-arm"),
                 control_audit);
  ArmRun treatment(world, treatment_policy, "treatment",
                   diversion.treatment_users, diversion.treatment_items,
                   derive_seed(seed, "treatment-arm"), treatment_audit);

  for (uint32_t step = 0; step < config.world.steps; ++step) {
    control.run_step(step);
    treatment.run_step(step);
  }

  SeedResult result;
  result.seed = seed;
  result.control = control.metrics();
  result.treatment = treatment.metrics();
  result.deltas = compute_deltas(result.control, result.treatment);
  return result;
}

// Runs every seed in the config, at most `jobs` seeds in flight. Seeds and
// arms own their stores and RNG streams; results are merged in seed order,
// so the report does not depend on scheduling.
inline ExperimentReport run_experiment(const RunConfig& config,
                                       unsigned jobs = 1) {
  validate(config);
  const bool audit = !config.output.audit_dir.empty();
  if (audit) {
    std::filesystem::create_directories(config.output.audit_dir);
  }

  std::vector<SeedResult> results(config.seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.seeds.size()) return;
      try {
        const uint64_t seed = config.seeds[i];
        std::unique_ptr<std::ofstream> control_audit;
        std::unique_ptr<std::ofstream> treatment_audit;
        if (audit) {
          const auto open = [&](const std::string& arm) {
            auto path = std::filesystem::path(config.output.audit_dir) /
                        ("audit_seed" + std::to_string(seed) + "_" + arm +
                         ".jsonl");
            auto out = std::make_unique<std::ofstream>(path);
            if (!*out) throw IoError("cannot open audit log: " + path.string());
            return out;
          };
          control_audit = open("control");
          treatment_audit = open("treatment");
        }
        results[i] = run_seed(config, config.seeds[i], control_audit.get(),
                              treatment_audit.get());
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  if (jobs <= 1 || config.seeds.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    const unsigned n = std::min<unsigned>(jobs, config.seeds.size());
    threads.reserve(n);
    for (unsigned t = 0; t < n; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentReport report;
  report.per_seed = std::move(results);
  report.aggregate = aggregate_deltas(report.per_seed);
  return report;
}

}  // namespace explore
