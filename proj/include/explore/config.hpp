#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "explore/errors.hpp"
#include "explore/pipeline.hpp"
#include "explore/world.hpp"

namespace explore {

struct DiversionConfig {
  double user_fraction = 0.5;  // share of users in the treatment arm
  double item_fraction = 0.5;  // share of items in the treatment arm
};

inline void validate(const DiversionConfig& config) {
  if (!(config.user_fraction > 0.0 && config.user_fraction < 1.0)) {
    throw ConfigError("diversion.user_fraction: must be in (0,1)");
  }
  if (!(config.item_fraction > 0.0 && config.item_fraction < 1.0)) {
    throw ConfigError("diversion.item_fraction: must be in (0,1)");
  }
}

struct OutputConfig {
  std::string report_path = "report.json";
  std::string audit_dir;  // empty: no audit logs written
};

// Full experiment description: one world, a treatment and a control serving
// policy, the user/item diversion, and the seed list. Defaults give the desk
// scale co-diverted experiment (treatment filters at k=2, control does not).
struct RunConfig {
  WorldConfig world;
  ServePolicy treatment;
  ServePolicy control = control_default();
  DiversionConfig diversion;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  bool parallel = false;  // step-boundary counter visibility in both arms
  OutputConfig output;

  static ServePolicy control_default() {
    ServePolicy policy;
    policy.filter_enabled = false;
    return policy;
  }
};

inline void validate(const RunConfig& config) {
  validate(config.world);
  validate(config.treatment, "treatment");
  validate(config.control, "control");
  validate(config.diversion);
  if (config.seeds.empty()) throw ConfigError("seeds: must not be empty");
  std::vector<uint64_t> sorted = config.seeds;
  std::sort(sorted.begin(), sorted.end());
  const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    throw ConfigError("seeds: duplicate seed " + std::to_string(*dup));
  }
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown key: " + prefix + it.key());
  }
}

inline const nlohmann::json* find(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline void read_double(const nlohmann::json& obj, const std::string& prefix,
                        const char* key, double& out) {
  const nlohmann::json* v = find(obj, key);
  if (!v) return;
  if (!v->is_number()) throw ConfigError(prefix + key + ": expected a number");
  out = v->get<double>();
}

inline void read_bool(const nlohmann::json& obj, const std::string& prefix,
                      const char* key, bool& out) {
  const nlohmann::json* v = find(obj, key);
  if (!v) return;
  if (!v->is_boolean()) throw ConfigError(prefix + key + ": expected a boolean");
  out = v->get<bool>();
}

inline void read_string(const nlohmann::json& obj, const std::string& prefix,
                        const char* key, std::string& out) {
  const nlohmann::json* v = find(obj, key);
  if (!v) return;
  if (!v->is_string()) throw ConfigError(prefix + key + ": expected a string");
  out = v->get<std::string>();
}

template <typename UInt>
inline void read_uint(const nlohmann::json& obj, const std::string& prefix,
                      const char* key, UInt& out) {
  const nlohmann::json* v = find(obj, key);
  if (!v) return;
  if (v->is_number_integer()) {
    if (!v->is_number_unsigned() && v->get<int64_t>() < 0) {
      throw ConfigError(prefix + key + ": must be a non-negative integer");
    }
    const uint64_t raw = v->get<uint64_t>();
    if (raw > std::numeric_limits<UInt>::max()) {
      throw ConfigError(prefix + key + ": value out of range");
    }
    out = static_cast<UInt>(raw);
    return;
  }
  throw ConfigError(prefix + key + ": expected an integer");
}

}  // namespace detail

inline MiscalibrationSpec::Mode miscalibration_mode_from_string(
    const std::string& text) {
  if (text == "identity") return MiscalibrationSpec::Mode::kIdentity;
  if (text == "power") return MiscalibrationSpec::Mode::kPower;
  if (text == "additive-noise") return MiscalibrationSpec::Mode::kAdditiveNoise;
  throw ConfigError(
      "world.miscalibration.mode: expected one of identity, power, "
      "additive-noise; got '" +
      text + "'");
}

inline std::string to_string(MiscalibrationSpec::Mode mode) {
  switch (mode) {
    case MiscalibrationSpec::Mode::kIdentity:
      return "identity";
    case MiscalibrationSpec::Mode::kPower:
      return "power";
    case MiscalibrationSpec::Mode::kAdditiveNoise:
      return "additive-noise";
  }
  return "identity";
}

inline WorldConfig world_config_from_json(const nlohmann::json& obj,
                                          const std::string& prefix) {
  if (!obj.is_object()) throw ConfigError(prefix + ": expected an object");
  detail::reject_unknown_keys(obj,
                              {"num_users", "dim", "num_clusters",
                               "items_per_step", "steps", "logit_scale",
                               "quality_offset_mean", "quality_offset_std",
                               "miscalibration", "seed"},
                              prefix + ".");
  WorldConfig config;
  const std::string p = prefix + ".";
  detail::read_uint(obj, p, "num_users", config.num_users);
  detail::read_uint(obj, p, "dim", config.dim);
  detail::read_uint(obj, p, "num_clusters", config.num_clusters);
  detail::read_uint(obj, p, "items_per_step", config.items_per_step);
  detail::read_uint(obj, p, "steps", config.steps);
  detail::read_double(obj, p, "logit_scale", config.logit_scale);
  detail::read_double(obj, p, "quality_offset_mean",
                      config.quality_offset_mean);
  detail::read_double(obj, p, "quality_offset_std", config.quality_offset_std);
  detail::read_uint(obj, p, "seed", config.seed);
  if (const nlohmann::json* m = detail::find(obj, "miscalibration")) {
    if (!m->is_object()) {
      throw ConfigError(p + "miscalibration: expected an object");
    }
    detail::reject_unknown_keys(*m, {"mode", "param"}, p + "miscalibration.");
    std::string mode = to_string(config.miscalibration.mode);
    detail::read_string(*m, p + "miscalibration.", "mode", mode);
    config.miscalibration.mode = miscalibration_mode_from_string(mode);
    detail::read_double(*m, p + "miscalibration.", "param",
                        config.miscalibration.param);
  }
  return config;
}

inline ServePolicy policy_from_json(const nlohmann::json& obj,
                                    const std::string& prefix,
                                    const ServePolicy& defaults) {
  if (!obj.is_object()) throw ConfigError(prefix + ": expected an object");
  detail::reject_unknown_keys(obj,
                              {"filter_enabled", "k", "retrieval_size",
                               "slate_size", "graduation", "prior"},
                              prefix + ".");
  ServePolicy policy = defaults;
  const std::string p = prefix + ".";
  detail::read_bool(obj, p, "filter_enabled", policy.filter_enabled);
  detail::read_double(obj, p, "k", policy.k);
  if (std::isnan(policy.k) || policy.k < 0.0) {
    throw ConfigError(p + "k: must be >= 0");
  }
  detail::read_uint(obj, p, "retrieval_size", policy.retrieval_size);
  detail::read_uint(obj, p, "slate_size", policy.slate_size);
  if (const nlohmann::json* g = detail::find(obj, "graduation")) {
    if (!g->is_object()) throw ConfigError(p + "graduation: expected an object");
    detail::reject_unknown_keys(*g, {"min_impressions", "min_posterior_mean"},
                                p + "graduation.");
    detail::read_uint(*g, p + "graduation.", "min_impressions",
                      policy.graduation.min_impressions);
    detail::read_double(*g, p + "graduation.", "min_posterior_mean",
                        policy.graduation.min_posterior_mean);
  }
  if (const nlohmann::json* pr = detail::find(obj, "prior")) {
    if (!pr->is_object()) throw ConfigError(p + "prior: expected an object");
    detail::reject_unknown_keys(*pr, {"alpha", "beta"}, p + "prior.");
    detail::read_double(*pr, p + "prior.", "alpha", policy.prior.alpha);
    detail::read_double(*pr, p + "prior.", "beta", policy.prior.beta);
  }
  return policy;
}

inline RunConfig run_config_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) throw ConfigError("config root: expected an object");
  detail::reject_unknown_keys(obj,
                              {"world", "treatment", "control", "diversion",
                               "seeds", "parallel", "output"},
                              "");
  RunConfig config;
  if (const nlohmann::json* w = detail::find(obj, "world")) {
    config.world = world_config_from_json(*w, "world");
  }
  if (const nlohmann::json* t = detail::find(obj, "treatment")) {
    config.treatment = policy_from_json(*t, "treatment", config.treatment);
  }
  if (const nlohmann::json* c = detail::find(obj, "control")) {
    config.control = policy_from_json(*c, "control", config.control);
  }
  if (const nlohmann::json* d = detail::find(obj, "diversion")) {
    if (!d->is_object()) throw ConfigError("diversion: expected an object");
    detail::reject_unknown_keys(*d, {"user_fraction", "item_fraction"},
                                "diversion.");
    detail::read_double(*d, "diversion.", "user_fraction",
                        config.diversion.user_fraction);
    detail::read_double(*d, "diversion.", "item_fraction",
                        config.diversion.item_fraction);
  }
  if (const nlohmann::json* s = detail::find(obj, "seeds")) {
    if (!s->is_array()) throw ConfigError("seeds: expected an array");
    config.seeds.clear();
    for (const auto& v : *s) {
      if (!v.is_number_integer() ||
          (!v.is_number_unsigned() && v.get<int64_t>() < 0)) {
        throw ConfigError("seeds: entries must be non-negative integers");
      }
      config.seeds.push_back(v.get<uint64_t>());
    }
  }
  detail::read_bool(obj, "", "parallel", config.parallel);
  if (const nlohmann::json* o = detail::find(obj, "output")) {
    if (!o->is_object()) throw ConfigError("output: expected an object");
    detail::reject_unknown_keys(*o, {"report_path", "audit_dir"}, "output.");
    detail::read_string(*o, "output.", "report_path",
                        config.output.report_path);
    detail::read_string(*o, "output.", "audit_dir", config.output.audit_dir);
  }
  validate(config);
  return config;
}

inline nlohmann::json to_json(const WorldConfig& config) {
  return {{"num_users", config.num_users},
          {"dim", config.dim},
          {"num_clusters", config.num_clusters},
          {"items_per_step", config.items_per_step},
          {"steps", config.steps},
          {"logit_scale", config.logit_scale},
          {"quality_offset_mean", config.quality_offset_mean},
          {"quality_offset_std", config.quality_offset_std},
          {"miscalibration",
           {{"mode", to_string(config.miscalibration.mode)},
            {"param", config.miscalibration.param}}},
          {"seed", config.seed}};
}

inline nlohmann::json to_json(const ServePolicy& policy) {
  return {{"filter_enabled", policy.filter_enabled},
          {"k", policy.k},
          {"retrieval_size", policy.retrieval_size},
          {"slate_size", policy.slate_size},
          {"graduation",
           {{"min_impressions", policy.graduation.min_impressions},
            {"min_posterior_mean", policy.graduation.min_posterior_mean}}},
          {"prior",
           {{"alpha", policy.prior.alpha}, {"beta", policy.prior.beta}}}};
}

inline nlohmann::json to_json(const RunConfig& config) {
  return {{"world", to_json(config.world)},
          {"treatment", to_json(config.treatment)},
          {"control", to_json(config.control)},
          {"diversion",
           {{"user_fraction", config.diversion.user_fraction},
            {"item_fraction", config.diversion.item_fraction}}},
          {"seeds", config.seeds},
          {"parallel", config.parallel},
          {"output",
           {{"report_path", config.output.report_path},
            {"audit_dir", config.output.audit_dir}}}};
}

// Loads, applies defaults, and fully validates a run config; every invalid
// field is reported with its key path before any simulation starts.
inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json obj = nlohmann::json::parse(in, nullptr, false);
  if (obj.is_discarded()) {
    throw ConfigError("config file is not valid JSON: " + path);
  }
  return run_config_from_json(obj);
}

}  // namespace explore
