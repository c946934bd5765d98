#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "abm/error.hpp"
#include "abm/sim/config.hpp"

namespace abm::io {

using json = nlohmann::json;

// Config files are flat JSON objects keyed by the model's symbols:
//   N M p k alpha delta_R c n n_sec H_M H_j P_group tau a f b1
//   initial_state seed t_max warmup
// A calibration report is also accepted: beta, delta_r and tau are checked
// or ignored, and delta_F sets a = delta_F / 2 unless a is given.

namespace detail {

template <class T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
void read_if(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = get_field<T>(j, key);
}

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "N", "M", "p", "k", "alpha", "delta_R", "c", "n", "n_sec", "H_M", "H_j", "P_group",
      "tau", "a", "f", "b1", "initial_state", "seed", "t_max", "warmup", "model", "preset",
      // calibration report fields
      "beta", "delta_r", "delta_F", "volume_ratio", "tau_deviated", "calibration"};
  return keys;
}

}  // namespace detail

/// Overlays the fields present in `j` onto `cfg`. Unknown keys are rejected
/// so that typos do not silently fall back to defaults.
inline void apply_json(const json& j, sim::ModelConfig& cfg) {
  using detail::read_if;
  if (!j.is_object()) throw Error(ErrorKind::config, "config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!detail::known_keys().count(key))
      throw Error(ErrorKind::config, "unknown config field '" + key + "'");

  if (j.contains("preset")) {
    const auto preset = detail::get_field<std::string>(j, "preset");
    sim::ModelConfig base;
    if (preset == "nyse") base = sim::nyse_preset();
    else if (preset == "hkse") base = sim::hkse_preset();
    else throw Error(ErrorKind::config, "field 'preset' must be nyse or hkse");
    cfg.H_M = base.H_M;
    cfg.H_j = base.H_j;
    cfg.group_prob = base.group_prob;
  }

  read_if(j, "N", cfg.agents);
  read_if(j, "M", cfg.max_horizon);
  read_if(j, "p", cfg.trade_prob);
  read_if(j, "k", cfg.return_scale);
  read_if(j, "alpha", cfg.alpha);
  read_if(j, "delta_R", cfg.delta_R);
  read_if(j, "c", cfg.preference);
  read_if(j, "n", cfg.stocks);
  read_if(j, "n_sec", cfg.sectors);
  read_if(j, "H_M", cfg.H_M);
  read_if(j, "H_j", cfg.H_j);
  read_if(j, "P_group", cfg.group_prob);
  read_if(j, "tau", cfg.tau);
  read_if(j, "f", cfg.dominant_fraction);
  read_if(j, "b1", cfg.force_rate);
  read_if(j, "initial_state", cfg.initial_state);
  read_if(j, "seed", cfg.seed);
  read_if(j, "t_max", cfg.t_max);
  read_if(j, "warmup", cfg.warmup);
  if (j.contains("a")) cfg.asym = detail::get_field<double>(j, "a");
  else if (j.contains("delta_F")) cfg.asym = 0.5 * detail::get_field<double>(j, "delta_F");

  if (j.contains("beta") && j.contains("alpha")) {
    const double beta = detail::get_field<double>(j, "beta");
    if (std::abs(cfg.alpha + beta - 2.0) > 1e-12)
      throw Error(ErrorKind::config, "field 'beta' inconsistent with alpha (alpha + beta != 2)");
  }
}

inline sim::ModelConfig config_from_json(const json& j, sim::ModelKind model) {
  sim::ModelConfig cfg = sim::default_config(model);
  apply_json(j, cfg);
  return cfg;
}

inline json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::validation, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

inline sim::ModelConfig load_config(const std::filesystem::path& path, sim::ModelKind model) {
  return config_from_json(parse_json_file(path), model);
}

/// Full config as JSON, including fields the model ignores.
inline json to_json(const sim::ModelConfig& c) {
  return json{{"N", c.agents},       {"M", c.max_horizon},
              {"p", c.trade_prob},   {"k", c.return_scale},
              {"alpha", c.alpha},    {"delta_R", c.delta_R},
              {"c", c.preference},   {"n", c.stocks},
              {"n_sec", c.sectors},  {"H_M", c.H_M},
              {"H_j", c.H_j},        {"P_group", c.group_prob},
              {"tau", c.tau},        {"a", c.asym},
              {"f", c.dominant_fraction}, {"b1", c.force_rate},
              {"initial_state", c.initial_state},
              {"seed", c.seed},      {"t_max", c.t_max},
              {"warmup", c.warmup}};
}

}  // namespace abm::io
