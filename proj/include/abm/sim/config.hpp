#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "abm/error.hpp"

namespace abm::sim {

enum class ModelKind { a, b, c, d };

inline const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::a: return "a";
    case ModelKind::b: return "b";
    case ModelKind::c: return "c";
    case ModelKind::d: return "d";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "a" || s == "A") return ModelKind::a;
  if (s == "b" || s == "B") return ModelKind::b;
  if (s == "c" || s == "C") return ModelKind::c;
  if (s == "d" || s == "D") return ModelKind::d;
  throw Error(ErrorKind::config, "unknown model '" + s + "' (expected a, b, c or d)");
}

/// Parameters for all four models. Fields irrelevant to a model are ignored
/// by its driver and by validate().
struct ModelConfig {
  // shared
  std::size_t agents = 10000;      // N
  std::size_t max_horizon = 150;   // M
  double trade_prob = 0.0154;      // p, one-sided daily probability
  double return_scale = 0.1;       // k in R'(t); see default_return_scale
  double alpha = 1.0;              // bull trading factor; beta = 2 - alpha
  int delta_R = 0;                 // herding shift
  // model B
  double preference = 0.0;         // c
  // model C
  std::size_t stocks = 50;         // n
  std::size_t sectors = 5;         // n_sec
  double H_M = 0.363;
  std::vector<double> H_j{0.491, 0.414, 0.438, 0.431, 0.546};
  double group_prob = 0.363;       // buy (= sell) probability of an M-group
  // model D
  double tau = 26.0;               // correlating time, state flip prob 1/tau
  double asym = 0.2;               // a
  double dominant_fraction = 0.8;  // f
  double force_rate = 3.5;         // b1
  int initial_state = -1;          // S(0); -1 draws it with probability 1/2
  // run control
  std::uint64_t seed = 1;
  std::size_t t_max = 20150;       // total days including warmup
  std::size_t warmup = 150;

  double beta() const noexcept { return 2.0 - alpha; }
  std::size_t recorded_days() const noexcept { return t_max > warmup ? t_max - warmup : 0; }
};

namespace detail {
[[noreturn]] inline void bad_field(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::config, "field '" + field + "' " + why);
}
}  // namespace detail

inline void validate(const ModelConfig& c, ModelKind model) {
  using detail::bad_field;
  if (c.agents < 1) bad_field("N", "must be >= 1");
  if (c.max_horizon < 50 || c.max_horizon > 500) bad_field("M", "must lie in [50, 500]");
  if (!(c.trade_prob > 0.0 && c.trade_prob < 0.5)) bad_field("p", "must lie in (0, 0.5)");
  if (!(c.return_scale > 0.0) || !std::isfinite(c.return_scale)) bad_field("k", "must be > 0");
  if (!(c.alpha > 0.0 && c.alpha < 2.0)) bad_field("alpha", "must lie in (0, 2)");
  if (c.alpha * c.trade_prob * 2.0 > 1.0 || c.beta() * c.trade_prob * 2.0 > 1.0)
    bad_field("alpha", "gives a trading probability above 1");
  if (c.warmup < c.max_horizon) bad_field("warmup", "must be >= M");
  if (c.t_max <= c.warmup) bad_field("t_max", "must exceed warmup");

  if (model == ModelKind::b && !(c.preference >= 0.0 && c.preference <= 1.0))
    bad_field("c", "must lie in [0, 1]");

  if (model == ModelKind::c) {
    if (c.stocks < 1) bad_field("n", "must be >= 1");
    if (c.sectors < 1 || c.sectors > c.stocks) bad_field("n_sec", "must lie in [1, n]");
    if (c.H_j.size() != c.sectors) bad_field("H_j", "must have n_sec entries");
    if (!(c.H_M >= 0.0)) bad_field("H_M", "must be >= 0");
    for (std::size_t j = 0; j < c.H_j.size(); ++j)
      if (!(c.H_j[j] > c.H_M))
        bad_field("H_j", "sector " + std::to_string(j + 1) + " has H_j <= H_M");
    if (!(c.group_prob >= 0.0 && c.group_prob <= 0.5)) bad_field("P_group", "must lie in [0, 0.5]");
  }

  if (model == ModelKind::d) {
    if (!(c.tau >= 1.0)) bad_field("tau", "must be >= 1");
    if (!(c.asym >= 0.0 && c.asym < 1.0)) bad_field("a", "must lie in [0, 1)");
    if (!(c.dominant_fraction > 0.5 && c.dominant_fraction <= 1.0))
      bad_field("f", "must lie in (0.5, 1]");
    if (!(c.force_rate > 0.0)) bad_field("b1", "must be > 0");
    if (c.initial_state < -1 || c.initial_state > 1) bad_field("initial_state", "must be -1, 0 or 1");
  }
}

/// k for R'(t). Model C sums agent decisions per stock over far fewer agents
/// per group, so it needs a smaller scale to keep the I-groups from merging.
inline double default_return_scale(ModelKind model) {
  return model == ModelKind::c ? 0.02 : 0.1;
}

/// Defaults for one model.
inline ModelConfig default_config(ModelKind model) {
  ModelConfig c;
  c.return_scale = default_return_scale(model);
  return c;
}

/// Model C market presets: co-movement degrees and M-group probability.
inline ModelConfig nyse_preset() {
  ModelConfig c = default_config(ModelKind::c);
  c.H_M = 0.363;
  c.H_j = {0.491, 0.414, 0.438, 0.431, 0.546};
  c.group_prob = 0.363;
  return c;
}

inline ModelConfig hkse_preset() {
  ModelConfig c = default_config(ModelKind::c);
  c.H_M = 0.306;
  c.H_j = {0.426, 0.406, 0.364, 0.361, 0.340};
  c.group_prob = 0.317;
  return c;
}

}  // namespace abm::sim
