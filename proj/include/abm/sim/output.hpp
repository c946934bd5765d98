#pragma once

#include <string>
#include <vector>

namespace abm::sim {

/// Optional per-day traces; a vector is empty when the model has no such
/// quantity.
struct Diagnostics {
  std::vector<double> trade_prob;   // P_trade(t), or mean P_i(t) for model D
  std::vector<double> herding;      // D(t) = average cluster size / N
  std::vector<double> info_state;   // S(t), model D
  std::vector<double> mean_force;   // sum_i F_i(t) / N, model D
};

/// Recorded (post-warmup) days of one simulation run.
struct SimOutput {
  std::vector<double> returns;                    // R(t)
  std::vector<std::vector<double>> stock_returns; // model C: [stock][day]
  std::vector<std::size_t> stock_sector;          // model C: 0-based sector id per stock
  std::vector<std::size_t> stock_agents;          // model C: N_k
  Diagnostics diagnostics;

  std::size_t days() const noexcept { return returns.size(); }
};

inline std::string stock_ticker(std::size_t k) {
  std::string s = std::to_string(k);
  return "S" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

}  // namespace abm::sim
