#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "abm/rng.hpp"
#include "abm/sim/clusters.hpp"
#include "abm/sim/config.hpp"
#include "abm/sim/horizon.hpp"
#include "abm/sim/output.hpp"

namespace abm::sim {

inline int sign(double x) { return (x > 0.0) - (x < 0.0); }

/// Long-run mean of F_i(t) over agents and time. The market state spends
/// half the time in each state, so an agent is in the high-attention state
/// with probability f/2 + (1 - f)/2 = 1/2 whatever f is, and y has mean
/// 1/b1. The bull/bear factor averages to one.
inline double mean_information_force(double force_rate) { return 0.5 / force_rate; }

/// Baseline trading probability P(0) = 2p / (1 + mean F).
inline double baseline_trade_prob(double p, double force_rate) {
  return 2.0 * p / (1.0 + mean_information_force(force_rate));
}

/// Bull/bear factor on the information force: 1 + a in bear markets
/// (R' < 0), 1 - a in bull markets, 1 when R' = 0.
inline double force_asymmetry(double weighted_return, double a) {
  return 1.0 - a * sign(weighted_return);
}

/// Agent-based model driven by information forces.
///
/// Agents carry no state from one day to the next, so which agents fall in
/// the dominating fraction does not affect any output; only the number of
/// agents with a positive force matters, and that count is exact.
inline SimOutput run_model_d(const ModelConfig& cfg) {
  validate(cfg, ModelKind::d);
  Rng rng(cfg.seed);
  const HorizonWeights weights = horizon_weights(cfg.max_horizon);
  WeightedReturnTracker tracker(weights, cfg.return_scale);

  const std::size_t n = cfg.agents;
  const auto dominant =
      static_cast<std::size_t>(std::llround(cfg.dominant_fraction * static_cast<double>(n)));
  const double p0 = baseline_trade_prob(cfg.trade_prob, cfg.force_rate);
  const double flip = 1.0 / cfg.tau;

  SimOutput out;
  const std::size_t recorded = cfg.recorded_days();
  out.returns.reserve(recorded);
  auto& d = out.diagnostics;
  d.trade_prob.reserve(recorded);
  d.herding.reserve(recorded);
  d.info_state.reserve(recorded);
  d.mean_force.reserve(recorded);

  int state = cfg.initial_state >= 0 ? cfg.initial_state : (rng.bernoulli(0.5) ? 1 : 0);
  ClusterPartition partition;
  std::vector<std::int8_t> scratch;

  for (std::size_t t = 0; t < cfg.t_max; ++t) {
    if (t > 0 && rng.bernoulli(flip)) state = 1 - state;
    double r;
    if (t < cfg.warmup) {
      r = static_cast<double>(independent_aggregate(n, cfg.trade_prob, cfg.trade_prob, rng));
    } else {
      const double weighted = tracker.value();
      const double y = rng.exponential(cfg.force_rate);
      const std::size_t active = state == 1 ? dominant : n - dominant;
      const double force = y * force_asymmetry(weighted, cfg.asym);
      const double p_active = std::clamp((1.0 + force) * p0, 0.0, 1.0);
      const double total_force = force * static_cast<double>(active);

      long long sum = 0;
      double size = 0.0;
      if (active > 0 && force > 0.0) {
        size = std::clamp(cfg.tau * total_force / static_cast<double>(n), 1.0,
                          static_cast<double>(active));
        partition_clusters(partition, active, size, rng);
        sum += cluster_aggregate(partition, 0.5 * p_active, 0.5 * p_active, rng, scratch);
      } else {
        sum += independent_aggregate(active, 0.5 * p0, 0.5 * p0, rng);
      }
      sum += independent_aggregate(n - active, 0.5 * p0, 0.5 * p0, rng);
      r = static_cast<double>(sum);

      out.returns.push_back(r);
      const double mean_p = force > 0.0
          ? (static_cast<double>(active) * p_active + static_cast<double>(n - active) * p0) /
                static_cast<double>(n)
          : p0;
      d.trade_prob.push_back(mean_p);
      d.herding.push_back(size / static_cast<double>(n));
      d.info_state.push_back(state);
      d.mean_force.push_back(total_force / static_cast<double>(n));
    }
    tracker.push(r);
  }
  return out;
}

}  // namespace abm::sim
