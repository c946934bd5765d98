#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace abm::sim {

/// Exponent of the power-law distribution of investment horizons.
inline constexpr double kHorizonExponent = 1.12;

/// Portion of agents per investment horizon i = 1..M, gamma_i ∝ i^-1.12.
struct HorizonWeights {
  std::vector<double> gamma;  // gamma[i-1] is the weight of horizon i

  std::size_t max_horizon() const noexcept { return gamma.size(); }
};

inline HorizonWeights horizon_weights(std::size_t max_horizon,
                                      double exponent = kHorizonExponent) {
  HorizonWeights w;
  w.gamma.resize(max_horizon);
  double total = 0.0;
  for (std::size_t i = 0; i < max_horizon; ++i) {
    w.gamma[i] = std::pow(static_cast<double>(i + 1), -exponent);
    total += w.gamma[i];
  }
  for (double& g : w.gamma) g /= total;
  return w;
}

/// Per-lag coefficients of the weighted return: the double sum
/// sum_i gamma_i sum_{j<i} R(t-j) regroups to sum_j tail_j R(t-j) with
/// tail_j = sum_{i>j} gamma_i.
inline std::vector<double> lag_coefficients(const HorizonWeights& w) {
  std::vector<double> tail(w.gamma.size());
  double acc = 0.0;
  for (std::size_t j = w.gamma.size(); j-- > 0;) {
    acc += w.gamma[j];
    tail[j] = acc;
  }
  return tail;
}

/// Weighted average return R'(t). `history` is in time order and its last
/// element is R(t); only the last M entries are used.
inline double weighted_return(std::span<const double> history, const HorizonWeights& w,
                              double k) {
  const std::size_t m = w.max_horizon();
  if (history.size() < m) return 0.0;
  const std::vector<double> tail = lag_coefficients(w);
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) sum += tail[j] * history[history.size() - 1 - j];
  return k * sum;
}

/// Ring buffer of the last M returns with the lag coefficients cached, for
/// evaluating R'(t) once per simulated day.
class WeightedReturnTracker {
 public:
  WeightedReturnTracker(const HorizonWeights& w, double k)
      : tail_(lag_coefficients(w)), buffer_(w.max_horizon(), 0.0), k_(k) {}

  void push(double r) {
    buffer_[head_] = r;
    head_ = (head_ + 1) % buffer_.size();
    if (filled_ < buffer_.size()) ++filled_;
  }

  bool ready() const noexcept { return filled_ == buffer_.size(); }

  /// R' over the pushed history; missing history counts as zero returns.
  double value() const {
    const std::size_t m = buffer_.size();
    double sum = 0.0;
    std::size_t idx = (head_ + m - 1) % m;
    for (std::size_t j = 0; j < m; ++j) {
      sum += tail_[j] * buffer_[idx];
      idx = (idx + m - 1) % m;
    }
    return k_ * sum;
  }

  /// Most recent return, or 0 before any push.
  double latest() const {
    return filled_ == 0 ? 0.0 : buffer_[(head_ + buffer_.size() - 1) % buffer_.size()];
  }

 private:
  std::vector<double> tail_;
  std::vector<double> buffer_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  double k_;
};

}  // namespace abm::sim
