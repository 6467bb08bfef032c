#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <istream>
#include <memory>
#include <mutex>
#include <ostream>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "explore/bayes.hpp"
#include "explore/errors.hpp"

namespace explore {

using ItemId = uint64_t;

// Per-item interaction totals. Satisfactions never exceed impressions in any
// observable snapshot, and both only grow over a run.
struct ItemStats {
  uint64_t impressions = 0;
  uint64_t satisfactions = 0;

  bool operator==(const ItemStats&) const = default;
};

// One impression and its binary outcome.
struct InteractionEvent {
  ItemId item = 0;
  bool satisfied = false;
  uint64_t sequence = 0;  // monotone event index in replay logs
};

// Concurrent per-item counter store feeding posterior computation. Counters
// are sharded by item-id hash; each item packs (impressions, satisfactions)
// into one 64-bit atomic (high/low 32 bits), so record() is a single
// fetch_add after first registration and every snapshot is a true
// linearization point with satisfactions <= impressions.
//
// 32 bits per field caps an item at ~4.2e9 impressions, far beyond desk
// scale.
class StatsStore {
 public:
  explicit StatsStore(std::size_t shard_count = 64)
      : shards_(round_up_pow2(shard_count)), mask_(shards_.size() - 1) {}

  StatsStore(StatsStore&&) = default;
  StatsStore& operator=(StatsStore&&) = default;

  void record(const InteractionEvent& event) {
    record(event.item, event.satisfied);
  }

  void record(ItemId item, bool satisfied) {
    cell_for(item).fetch_add(kImpressionUnit + (satisfied ? 1u : 0u),
                             std::memory_order_relaxed);
  }

  ItemStats snapshot(ItemId item) const {
    const Shard& shard = shard_for(item);
    std::shared_lock lock(shard.mutex);
    auto it = shard.cells.find(item);
    if (it == shard.cells.end()) return ItemStats{};
    return unpack(it->second->load(std::memory_order_relaxed));
  }

  BetaPosterior posterior(ItemId item, const BetaPrior& prior) const {
    const ItemStats stats = snapshot(item);
    return posterior_from(prior, stats.satisfactions, stats.impressions);
  }

  // All items with their stats, ascending by id.
  std::vector<std::pair<ItemId, ItemStats>> dump() const {
    std::vector<std::pair<ItemId, ItemStats>> rows;
    for (const Shard& shard : shards_) {
      std::shared_lock lock(shard.mutex);
      for (const auto& [id, cell] : shard.cells) {
        rows.emplace_back(id, unpack(cell->load(std::memory_order_relaxed)));
      }
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return rows;
  }

  ItemStats totals() const {
    ItemStats total;
    for (const auto& [id, stats] : dump()) {
      total.impressions += stats.impressions;
      total.satisfactions += stats.satisfactions;
    }
    return total;
  }

  std::size_t item_count() const {
    std::size_t n = 0;
    for (const Shard& shard : shards_) {
      std::shared_lock lock(shard.mutex);
      n += shard.cells.size();
    }
    return n;
  }

  // Persistence: UTF-8 CSV, header row, one row per item, LF line endings.
  // Call at quiescence; rows are written in ascending item-id order.
  void write_csv(std::ostream& out) const {
    out << "item_id,impressions,satisfactions\n";
    for (const auto& [id, stats] : dump()) {
      out << id << ',' << stats.impressions << ',' << stats.satisfactions
          << '\n';
    }
    if (!out) throw IoError("failed writing stats store");
  }

  static StatsStore read_csv(std::istream& in) {
    StatsStore store;
    std::string line;
    if (!std::getline(in, line)) {
      throw DataError("line 1: missing header row");
    }
    if (line != "item_id,impressions,satisfactions") {
      throw DataError("line 1: bad header '" + line + "'");
    }
    uint64_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto malformed = [&]() -> DataError {
        return DataError("line " + std::to_string(line_no) +
                         ": malformed row '" + line + "'");
      };
      // exactly three comma-separated unsigned decimal fields
      uint64_t fields[3] = {0, 0, 0};
      std::size_t field = 0, pos = 0;
      while (true) {
        const std::size_t end = line.find(',', pos);
        const std::string token = line.substr(
            pos, end == std::string::npos ? std::string::npos : end - pos);
        if (field >= 3 || token.empty() ||
            token.find_first_not_of("0123456789") != std::string::npos ||
            token.size() > 19) {
          throw malformed();
        }
        fields[field++] = std::stoull(token);
        if (end == std::string::npos) break;
        pos = end + 1;
      }
      if (field != 3) throw malformed();
      const uint64_t id = fields[0];
      const uint64_t impressions = fields[1];
      const uint64_t satisfactions = fields[2];
      if (impressions >= kImpressionUnit) {
        throw DataError("line " + std::to_string(line_no) +
                        ": impression count out of range");
      }
      if (satisfactions > impressions) {
        throw DataError("line " + std::to_string(line_no) +
                        ": invalid counts: " + std::to_string(satisfactions) +
                        " satisfactions exceed " +
                        std::to_string(impressions) + " impressions");
      }
      store.add_counts(id, impressions, satisfactions);
    }
    return store;
  }

  // Bulk add, used by import and merges. Not intended for the hot path.
  void add_counts(ItemId item, uint64_t impressions, uint64_t satisfactions) {
    if (satisfactions > impressions) {
      throw DataError("invalid counts: " + std::to_string(satisfactions) +
                      " satisfactions exceed " + std::to_string(impressions) +
                      " impressions");
    }
    if (impressions >= kImpressionUnit) {
      throw DataError("impression count out of range: " +
                      std::to_string(impressions));
    }
    cell_for(item).fetch_add(impressions * kImpressionUnit + satisfactions,
                             std::memory_order_relaxed);
  }

 private:
  static constexpr uint64_t kImpressionUnit = 1ull << 32;

  struct Shard {
    mutable std::shared_mutex mutex;
    std::unordered_map<ItemId, std::unique_ptr<std::atomic<uint64_t>>> cells;
  };

  static std::size_t round_up_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
  }

  static ItemStats unpack(uint64_t packed) {
    return ItemStats{packed >> 32, packed & 0xffffffffull};
  }

  Shard& shard_for(ItemId item) {
    return shards_[splitmix_index(item)];
  }
  const Shard& shard_for(ItemId item) const {
    return shards_[splitmix_index(item)];
  }

  std::size_t splitmix_index(ItemId item) const {
    uint64_t x = item + 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return static_cast<std::size_t>((x ^ (x >> 31)) & mask_);
  }

  std::atomic<uint64_t>& cell_for(ItemId item) {
    Shard& shard = shard_for(item);
    {
      std::shared_lock lock(shard.mutex);
      auto it = shard.cells.find(item);
      if (it != shard.cells.end()) return *it->second;
    }
    std::unique_lock lock(shard.mutex);
    auto& cell = shard.cells[item];
    if (!cell) cell = std::make_unique<std::atomic<uint64_t>>(0);
    return *cell;
  }

  std::vector<Shard> shards_;
  std::size_t mask_;
};

}  // namespace explore
