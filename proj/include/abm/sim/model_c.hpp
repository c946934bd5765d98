#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "abm/rng.hpp"
#include "abm/sim/clusters.hpp"
#include "abm/sim/config.hpp"
#include "abm/sim/horizon.hpp"
#include "abm/sim/output.hpp"

namespace abm::sim {

/// Fixed market layout: which stock each agent holds and each stock's sector.
struct MarketLayout {
  std::vector<std::uint32_t> agent_stock;
  std::vector<std::size_t> stock_sector;
  std::vector<std::size_t> stock_agents;  // N_k
  std::size_t sectors = 1;
};

/// Sector of stock k when n stocks are split into n_sec contiguous,
/// equally sized blocks (sizes differ by at most one if n_sec does not
/// divide n).
inline std::size_t sector_of_stock(std::size_t k, std::size_t stocks, std::size_t sectors) {
  return k * sectors / stocks;
}

/// Every agent picks one stock uniformly at random.
inline MarketLayout make_layout(std::size_t agents, std::size_t stocks, std::size_t sectors,
                                Rng& rng) {
  MarketLayout m;
  m.sectors = sectors;
  m.agent_stock.resize(agents);
  m.stock_agents.assign(stocks, 0);
  for (auto& s : m.agent_stock) {
    s = static_cast<std::uint32_t>(rng.below(stocks));
    ++m.stock_agents[s];
  }
  m.stock_sector.resize(stocks);
  for (std::size_t k = 0; k < stocks; ++k) m.stock_sector[k] = sector_of_stock(k, stocks, sectors);
  return m;
}

/// Result of the three herding levels for one day. Each level maps members
/// of the level below onto groups of this level.
struct MultiLevelGroups {
  std::vector<std::uint32_t> agent_igroup;
  std::vector<std::uint32_t> igroup_stock;
  std::vector<std::uint32_t> igroup_sgroup;
  std::vector<std::uint32_t> sgroup_sector;
  std::vector<std::uint32_t> sgroup_mgroup;
  std::vector<std::size_t> igroups_per_stock;   // 1 / D_k^I, rounded
  std::vector<std::size_t> sgroups_per_sector;  // 1 / D_j^S, rounded
  std::vector<std::size_t> mslots_per_sector;   // 1 / D_j^M, rounded
  std::size_t mgroup_count = 1;

  std::uint32_t mgroup_of_agent(std::size_t i) const {
    return sgroup_mgroup[igroup_sgroup[agent_igroup[i]]];
  }
};

namespace detail {

/// Assigns `members` items to `targets` groups: draws without replacement
/// while distinct targets remain, then uniformly with replacement. `perm`
/// must hold a permutation of [0, targets) and stays one afterwards.
template <typename Out>
void spread_without_repeats(std::size_t members, std::size_t targets,
                            std::vector<std::uint32_t>& perm, Rng& rng, Out&& out) {
  for (std::size_t g = 0; g < members; ++g) {
    if (g < targets) {
      const std::size_t pick = g + rng.below(targets - g);
      std::swap(perm[g], perm[pick]);
      out(perm[g]);
    } else {
      out(static_cast<std::uint32_t>(rng.below(targets)));
    }
  }
}

inline void reset_perm(std::vector<std::uint32_t>& perm, std::size_t n) {
  perm.resize(n);
  std::iota(perm.begin(), perm.end(), 0u);
}

}  // namespace detail

/// Herding degree at stock level D_k^I = clamp(|R'_k|, 1, N_k) / N_k, and
/// the resulting I-group count max(1, round(1 / D_k^I)).
inline std::size_t igroup_count(double weighted_return, std::size_t stock_agents) {
  if (stock_agents == 0) return 0;
  const double nk = static_cast<double>(stock_agents);
  const double degree = std::clamp(std::abs(weighted_return), 1.0, nk) / nk;
  return group_count(1.0, degree);
}

/// Forms I-, S- and M-groups for one day from each stock's R'_k.
///
/// Average group sizes n(H_j - H_M) and n H_M are clamped to at least one
/// member.
inline MultiLevelGroups form_multilevel_groups(const MarketLayout& layout,
                                               std::span<const double> weighted_returns,
                                               double H_M, std::span<const double> H_j,
                                               Rng& rng) {
  const std::size_t stocks = layout.stock_agents.size();
  const double n = static_cast<double>(stocks);
  MultiLevelGroups g;

  // (i) stock level
  g.igroups_per_stock.resize(stocks);
  std::vector<std::size_t> ioffset(stocks + 1, 0);
  for (std::size_t k = 0; k < stocks; ++k) {
    g.igroups_per_stock[k] = igroup_count(weighted_returns[k], layout.stock_agents[k]);
    ioffset[k + 1] = ioffset[k] + g.igroups_per_stock[k];
  }
  g.igroup_stock.resize(ioffset[stocks]);
  for (std::size_t k = 0; k < stocks; ++k)
    std::fill(g.igroup_stock.begin() + static_cast<std::ptrdiff_t>(ioffset[k]),
              g.igroup_stock.begin() + static_cast<std::ptrdiff_t>(ioffset[k + 1]),
              static_cast<std::uint32_t>(k));
  g.agent_igroup.resize(layout.agent_stock.size());
  for (std::size_t i = 0; i < layout.agent_stock.size(); ++i) {
    const auto k = layout.agent_stock[i];
    g.agent_igroup[i] =
        static_cast<std::uint32_t>(ioffset[k] + rng.below(g.igroups_per_stock[k]));
  }

  // (ii) sector level
  const std::size_t sectors = layout.sectors;
  std::vector<std::size_t> sector_igroups(sectors, 0);
  for (std::size_t k = 0; k < stocks; ++k)
    sector_igroups[layout.stock_sector[k]] += g.igroups_per_stock[k];
  g.sgroups_per_sector.resize(sectors);
  std::vector<std::size_t> soffset(sectors + 1, 0);
  for (std::size_t j = 0; j < sectors; ++j) {
    const double avg = std::max(1.0, n * (H_j[j] - H_M));
    g.sgroups_per_sector[j] = group_count(static_cast<double>(sector_igroups[j]), avg);
    soffset[j + 1] = soffset[j] + g.sgroups_per_sector[j];
  }
  g.sgroup_sector.resize(soffset[sectors]);
  for (std::size_t j = 0; j < sectors; ++j)
    std::fill(g.sgroup_sector.begin() + static_cast<std::ptrdiff_t>(soffset[j]),
              g.sgroup_sector.begin() + static_cast<std::ptrdiff_t>(soffset[j + 1]),
              static_cast<std::uint32_t>(j));

  std::vector<std::uint32_t> perm;
  g.igroup_sgroup.resize(g.igroup_stock.size());
  for (std::size_t j = 0; j < sectors; ++j) {
    detail::reset_perm(perm, g.sgroups_per_sector[j]);
    for (std::size_t k = 0; k < stocks; ++k) {
      if (layout.stock_sector[k] != j) continue;
      std::size_t ig = ioffset[k];
      detail::spread_without_repeats(
          g.igroups_per_stock[k], g.sgroups_per_sector[j], perm, rng,
          [&](std::uint32_t s) { g.igroup_sgroup[ig++] = static_cast<std::uint32_t>(soffset[j] + s); });
    }
  }

  // (iii) market level
  const double avg_m = std::max(1.0, n * H_M);
  g.mslots_per_sector.resize(sectors);
  g.mgroup_count = 1;
  for (std::size_t j = 0; j < sectors; ++j) {
    g.mslots_per_sector[j] = group_count(static_cast<double>(g.sgroups_per_sector[j]), avg_m);
    g.mgroup_count = std::max(g.mgroup_count, g.mslots_per_sector[j]);
  }
  g.sgroup_mgroup.resize(g.sgroup_sector.size());
  for (std::size_t j = 0; j < sectors; ++j) {
    detail::reset_perm(perm, g.mslots_per_sector[j]);
    std::size_t sg = soffset[j];
    detail::spread_without_repeats(g.sgroups_per_sector[j], g.mslots_per_sector[j], perm, rng,
                                   [&](std::uint32_t m) { g.sgroup_mgroup[sg++] = m; });
  }
  return g;
}

/// Multi-level herding: I-groups per stock, S-groups per sector, M-groups
/// market-wide. Each M-group buys and sells with probability P_group.
inline SimOutput run_model_c(const ModelConfig& cfg) {
  validate(cfg, ModelKind::c);
  Rng rng(cfg.seed);
  const MarketLayout layout = make_layout(cfg.agents, cfg.stocks, cfg.sectors, rng);
  const HorizonWeights weights = horizon_weights(cfg.max_horizon);
  std::vector<WeightedReturnTracker> trackers(cfg.stocks,
                                              WeightedReturnTracker(weights, cfg.return_scale));

  SimOutput out;
  out.stock_sector = layout.stock_sector;
  out.stock_agents = layout.stock_agents;
  out.stock_returns.assign(cfg.stocks, {});
  for (auto& s : out.stock_returns) s.reserve(cfg.recorded_days());
  out.returns.reserve(cfg.recorded_days());
  out.diagnostics.herding.reserve(cfg.recorded_days());

  std::vector<double> weighted(cfg.stocks);
  std::vector<long long> day(cfg.stocks);
  std::vector<std::int8_t> decision;

  for (std::size_t t = 0; t < cfg.t_max; ++t) {
    std::fill(day.begin(), day.end(), 0);
    const bool warm = t < cfg.warmup;
    std::size_t mgroups = 0;
    if (warm) {
      for (auto k : layout.agent_stock)
        day[k] += draw_decision(cfg.trade_prob, cfg.trade_prob, rng);
    } else {
      for (std::size_t k = 0; k < cfg.stocks; ++k) weighted[k] = trackers[k].value();
      const MultiLevelGroups g = form_multilevel_groups(layout, weighted, cfg.H_M, cfg.H_j, rng);
      mgroups = g.mgroup_count;
      decision.resize(g.mgroup_count);
      for (auto& d : decision) d = draw_decision(cfg.group_prob, cfg.group_prob, rng);
      for (std::size_t i = 0; i < layout.agent_stock.size(); ++i)
        day[layout.agent_stock[i]] += decision[g.mgroup_of_agent(i)];
    }
    long long market = 0;
    for (std::size_t k = 0; k < cfg.stocks; ++k) {
      trackers[k].push(static_cast<double>(day[k]));
      market += day[k];
      if (!warm) out.stock_returns[k].push_back(static_cast<double>(day[k]));
    }
    if (!warm) {
      out.returns.push_back(static_cast<double>(market));
      out.diagnostics.herding.push_back(1.0 / static_cast<double>(mgroups));
    }
  }
  return out;
}

}  // namespace abm::sim
