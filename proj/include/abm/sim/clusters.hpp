#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "abm/error.hpp"
#include "abm/rng.hpp"

namespace abm::sim {

/// Assignment of agents to decision groups for one day.
struct ClusterPartition {
  std::vector<std::uint32_t> assignment;  // agent -> cluster id in [0, count)
  std::size_t count = 1;

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(count, 0);
    for (auto c : assignment) ++s[c];
    return s;
  }
};

/// Number of groups for a real-valued average group size.
inline std::size_t group_count(double members, double avg_size) {
  const double n = std::round(members / avg_size);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

/// Each agent independently joins one of max(1, round(N / avg)) clusters.
inline void partition_clusters(ClusterPartition& out, std::size_t agents, double avg_size,
                               Rng& rng) {
  const double n = static_cast<double>(std::max<std::size_t>(agents, 1));
  avg_size = std::clamp(avg_size, 1.0, n);
  out.count = group_count(n, avg_size);
  out.assignment.resize(agents);
  for (auto& a : out.assignment) a = static_cast<std::uint32_t>(rng.below(out.count));
}

inline ClusterPartition partition_clusters(std::size_t agents, double avg_size, Rng& rng) {
  ClusterPartition p;
  partition_clusters(p, agents, avg_size, rng);
  return p;
}

/// Trading decisions for one day: phi per agent and the aggregate return.
struct Decisions {
  std::vector<std::int8_t> phi;
  long long aggregate = 0;
};

inline void check_probabilities(double p_buy, double p_sell) {
  if (!(p_buy >= 0.0 && p_sell >= 0.0 && p_buy + p_sell <= 1.0 + 1e-12))
    throw Error(ErrorKind::config, "decision probabilities out of bounds (buy=" +
                                       std::to_string(p_buy) + ", sell=" +
                                       std::to_string(p_sell) + ")");
}

/// One draw: +1 (buy) with p_buy, -1 (sell) with p_sell, else 0.
inline std::int8_t draw_decision(double p_buy, double p_sell, Rng& rng) {
  const double u = rng.uniform();
  if (u < p_buy) return 1;
  if (u < p_buy + p_sell) return -1;
  return 0;
}

/// Every cluster draws one decision, adopted by all of its members.
inline Decisions cluster_decide(const ClusterPartition& partition, double p_buy,
                                double p_sell, Rng& rng) {
  check_probabilities(p_buy, p_sell);
  std::vector<std::int8_t> per_cluster(partition.count);
  for (auto& d : per_cluster) d = draw_decision(p_buy, p_sell, rng);
  Decisions out;
  out.phi.resize(partition.assignment.size());
  for (std::size_t i = 0; i < partition.assignment.size(); ++i) {
    out.phi[i] = per_cluster[partition.assignment[i]];
    out.aggregate += out.phi[i];
  }
  return out;
}

/// Aggregate-only variant of cluster_decide that reuses caller buffers; it
/// consumes the random stream identically.
inline long long cluster_aggregate(const ClusterPartition& partition, double p_buy,
                                   double p_sell, Rng& rng,
                                   std::vector<std::int8_t>& scratch) {
  check_probabilities(p_buy, p_sell);
  scratch.resize(partition.count);
  for (auto& d : scratch) d = draw_decision(p_buy, p_sell, rng);
  long long sum = 0;
  for (auto c : partition.assignment) sum += scratch[c];
  return sum;
}

/// Independent agents: each decides on its own.
inline long long independent_aggregate(std::size_t agents, double p_buy, double p_sell,
                                       Rng& rng) {
  long long sum = 0;
  for (std::size_t i = 0; i < agents; ++i) sum += draw_decision(p_buy, p_sell, rng);
  return sum;
}

}  // namespace abm::sim
