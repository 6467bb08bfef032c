#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "explore/errors.hpp"
#include "explore/pipeline.hpp"

namespace explore {

// Slate audit log: JSON-lines, one object per serve call.

inline nlohmann::json to_audit_json(const SlateRecord& record) {
  nlohmann::json shown = nlohmann::json::array();
  for (const ShownItem& s : record.shown) {
    shown.push_back({{"item_id", s.item_id},
                     {"predicted", s.predicted},
                     {"post_mean", s.posterior_mean},
                     {"post_std", s.posterior_std},
                     {"kept", s.kept},
                     {"satisfied", s.satisfied}});
  }
  nlohmann::json filtered = nlohmann::json::array();
  for (const FilteredItem& f : record.filtered) {
    filtered.push_back({{"item_id", f.item_id},
                        {"predicted", f.predicted},
                        {"post_mean", f.posterior_mean},
                        {"post_std", f.posterior_std}});
  }
  return {{"step", record.step},
          {"arm", record.arm},
          {"user_id", record.user_id},
          {"shown", shown},
          {"filtered", filtered}};
}

inline void write_audit_line(std::ostream& out, const SlateRecord& record) {
  out << to_audit_json(record).dump() << '\n';
}

inline SlateRecord audit_from_json(const nlohmann::json& j) {
  SlateRecord record;
  record.step = j.at("step").get<uint32_t>();
  record.arm = j.at("arm").get<std::string>();
  record.user_id = j.at("user_id").get<uint64_t>();
  for (const auto& s : j.at("shown")) {
    ShownItem shown;
    shown.item_id = s.at("item_id").get<ItemId>();
    shown.predicted = s.at("predicted").get<double>();
    shown.posterior_mean = s.at("post_mean").get<double>();
    shown.posterior_std = s.at("post_std").get<double>();
    shown.kept = s.at("kept").get<bool>();
    shown.satisfied = s.at("satisfied").get<bool>();
    record.shown.push_back(shown);
  }
  for (const auto& f : j.at("filtered")) {
    FilteredItem filtered;
    filtered.item_id = f.at("item_id").get<ItemId>();
    filtered.predicted = f.at("predicted").get<double>();
    filtered.posterior_mean = f.at("post_mean").get<double>();
    filtered.posterior_std = f.at("post_std").get<double>();
    record.filtered.push_back(filtered);
  }
  return record;
}

inline std::vector<SlateRecord> read_audit_log(std::istream& in) {
  std::vector<SlateRecord> records;
  std::string line;
  uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw DataError("line " + std::to_string(line_no) +
                      ": malformed audit record");
    }
    try {
      records.push_back(audit_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace explore
