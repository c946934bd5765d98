#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "abm/rng.hpp"
#include "abm/sim/clusters.hpp"
#include "abm/sim/config.hpp"
#include "abm/sim/horizon.hpp"
#include "abm/sim/output.hpp"

namespace abm::sim {

/// Trading probability for day t+1 given R'(t): 2p*alpha in bull markets,
/// 2p*beta in bear markets and 2p when R' is exactly zero.
inline double asymmetric_trade_prob(double weighted, double p, double alpha) {
  if (weighted > 0.0) return 2.0 * p * alpha;
  if (weighted < 0.0) return 2.0 * p * (2.0 - alpha);
  return 2.0 * p;
}

/// Average cluster size n_A(t+1) = |R'(t) - dR| clamped into [1, N].
inline double asymmetric_cluster_size(double weighted, int delta_R, std::size_t agents) {
  return std::clamp(std::abs(weighted - delta_R), 1.0, static_cast<double>(agents));
}

/// Integrated volatility perspective xi(t) = sum_i gamma_i v_i(t) / v_M(t),
/// where v_i is the mean of the last i volatilities. `volatility` is in time
/// order, last element v(t). Returns 1 when the background v_M is zero.
inline double volatility_perspective(std::span<const double> volatility,
                                     const HorizonWeights& w) {
  const std::size_t m = w.max_horizon();
  if (volatility.size() < m || m == 0) return 1.0;
  double running = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    running += volatility[volatility.size() - i];
    weighted += w.gamma[i - 1] * running / static_cast<double>(i);
  }
  const double background = running / static_cast<double>(m);
  if (background == 0.0) return 1.0;
  return weighted / background;
}

/// Buy probability p[c xi + (1 - c)] scaled to the day's trading
/// probability and clamped into [0, P_trade]. Sell takes the remainder.
inline double preference_buy_prob(double xi, double preference, double trade_prob) {
  const double buy = 0.5 * trade_prob * (preference * xi + (1.0 - preference));
  return std::clamp(buy, 0.0, trade_prob);
}

namespace detail {

inline SimOutput run_single_stock(const ModelConfig& cfg, ModelKind kind) {
  validate(cfg, kind);
  const HorizonWeights weights = horizon_weights(cfg.max_horizon);
  WeightedReturnTracker tracker(weights, cfg.return_scale);
  Rng rng(cfg.seed);

  const std::size_t m = cfg.max_horizon;
  std::vector<double> vol_ring(m, 0.0);  // model B volatility history
  std::vector<double> vol_window(m, 0.0);
  std::size_t vol_head = 0;

  SimOutput out;
  const std::size_t recorded = cfg.recorded_days();
  out.returns.reserve(recorded);
  out.diagnostics.trade_prob.reserve(recorded);
  out.diagnostics.herding.reserve(recorded);

  ClusterPartition partition;
  std::vector<std::int8_t> scratch;

  for (std::size_t t = 0; t < cfg.t_max; ++t) {
    double r;
    if (t < cfg.warmup) {
      r = static_cast<double>(
          independent_aggregate(cfg.agents, cfg.trade_prob, cfg.trade_prob, rng));
    } else {
      const double weighted = tracker.value();
      const double trade = asymmetric_trade_prob(weighted, cfg.trade_prob, cfg.alpha);
      double buy = 0.5 * trade;
      if (kind == ModelKind::b) {
        for (std::size_t i = 0; i < m; ++i) vol_window[i] = vol_ring[(vol_head + i) % m];
        const double xi = volatility_perspective(vol_window, weights);
        buy = preference_buy_prob(xi, cfg.preference, trade);
      }
      const double size = asymmetric_cluster_size(weighted, cfg.delta_R, cfg.agents);
      partition_clusters(partition, cfg.agents, size, rng);
      r = static_cast<double>(cluster_aggregate(partition, buy, trade - buy, rng, scratch));
      out.returns.push_back(r);
      out.diagnostics.trade_prob.push_back(trade);
      out.diagnostics.herding.push_back(size / static_cast<double>(cfg.agents));
    }
    tracker.push(r);
    vol_ring[vol_head] = std::abs(r);
    vol_head = (vol_head + 1) % m;
  }
  return out;
}

}  // namespace detail

/// Asymmetric trading and herding in bull and bear markets.
inline SimOutput run_model_a(const ModelConfig& cfg) {
  return detail::run_single_stock(cfg, ModelKind::a);
}

/// Model A plus a buy/sell imbalance driven by recent volatility relative to
/// its long-horizon background.
inline SimOutput run_model_b(const ModelConfig& cfg) {
  return detail::run_single_stock(cfg, ModelKind::b);
}

}  // namespace abm::sim
