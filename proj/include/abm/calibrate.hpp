#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abm/error.hpp"
#include "abm/ingest.hpp"
#include "abm/sim/horizon.hpp"
#include "abm/stats.hpp"

namespace abm::calibrate {

// ---------------------------------------------------------------------------
// Trading and herding asymmetry

struct AsymmetryEstimate {
  double alpha = 1.0;
  double beta = 1.0;
  double volume_ratio = 1.0;  // V+ / V-
  double delta_r = 0.0;
  int delta_R = 0;
  std::size_t bull_days = 0;
  std::size_t bear_days = 0;
};

/// alpha from the bull/bear volume ratio rho: alpha/beta = rho and
/// alpha + beta = 2 give alpha = 2 rho / (1 + rho).
inline double alpha_from_ratio(double ratio) { return 2.0 * ratio / (1.0 + ratio); }

/// Mean volume on days following a positive (V+) or negative (V-) weighted
/// return R'. Days whose R' is exactly zero count for neither.
inline AsymmetryEstimate trading_asymmetry(std::span<const double> returns,
                                           std::span<const double> volumes,
                                           const sim::HorizonWeights& weights, double k = 1.0) {
  if (volumes.size() != returns.size())
    throw Error(ErrorKind::validation, "trading_asymmetry needs a volume for every return");
  sim::WeightedReturnTracker tracker(weights, k);
  double up = 0.0, down = 0.0;
  AsymmetryEstimate est;
  for (std::size_t t = 0; t + 1 < returns.size(); ++t) {
    tracker.push(returns[t]);
    if (!tracker.ready()) continue;
    const double w = tracker.value();
    if (w > 0.0) {
      up += volumes[t + 1];
      ++est.bull_days;
    } else if (w < 0.0) {
      down += volumes[t + 1];
      ++est.bear_days;
    }
  }
  if (est.bull_days == 0 || est.bear_days == 0)
    throw Error(ErrorKind::insufficient_data, "trading_asymmetry needs both bull and bear days");
  const double vp = up / static_cast<double>(est.bull_days);
  const double vm = down / static_cast<double>(est.bear_days);
  if (!(vm > 0.0)) throw Error(ErrorKind::degenerate, "zero mean volume in bear markets");
  est.volume_ratio = vp / vm;
  est.alpha = alpha_from_ratio(est.volume_ratio);
  est.beta = 2.0 - est.alpha;
  return est;
}

inline AsymmetryEstimate trading_asymmetry(const ingest::ReturnSeries& series,
                                           const sim::HorizonWeights& weights, double k = 1.0) {
  if (!series.has_volume())
    throw Error(ErrorKind::validation, "trading_asymmetry needs volumes");
  return trading_asymmetry(series.returns, series.volume, weights, k);
}

/// Herding shift dr = (d_bear - d_bull) / 2 where d_bull and d_bear are the
/// volume-weighted mean |r| over rising and falling days.
inline double herding_shift(std::span<const double> normalized, std::span<const double> volumes) {
  if (volumes.size() != normalized.size())
    throw Error(ErrorKind::validation, "herding_shift needs a volume for every return");
  double bull_w = 0.0, bull_v = 0.0, bear_w = 0.0, bear_v = 0.0;
  for (std::size_t t = 0; t < normalized.size(); ++t) {
    if (normalized[t] > 0.0) {
      bull_w += volumes[t] * normalized[t];
      bull_v += volumes[t];
    } else if (normalized[t] < 0.0) {
      bear_w += volumes[t] * -normalized[t];
      bear_v += volumes[t];
    }
  }
  if (!(bull_v > 0.0) || !(bear_v > 0.0))
    throw Error(ErrorKind::insufficient_data, "herding_shift needs rising and falling days with volume");
  return 0.5 * (bear_w / bear_v - bull_w / bull_v);
}

/// One (dr, dR) calibration pair.
struct ShiftPair {
  const char* index;
  double delta_r;
  int delta_R;
};

/// Published (dr, dR) pairs for six stock indices.
inline constexpr ShiftPair kShiftTable[] = {
    {"S&P 500", 0.067, 3},  {"Shanghai", -0.043, -2}, {"Nikkei 225", 0.039, 2},
    {"FTSE 100", 0.028, 2}, {"Hangseng", 0.032, 2},   {"DAX", 0.013, 1},
};

/// Linear map dR = intercept + slope * dr.
struct ShiftMap {
  double slope = 0.0;
  double intercept = 0.0;

  /// Nearest integer, ties away from zero.
  int apply(double delta_r) const {
    return static_cast<int>(std::lround(intercept + slope * delta_r));
  }
};

enum class ShiftFit { affine, through_origin };

/// Least-squares line through the table pairs. The affine fit is the default:
/// the line through the origin cannot reproduce every published integer dR.
inline ShiftMap fit_shift_map(std::span<const ShiftPair> table, ShiftFit mode = ShiftFit::affine) {
  if (table.empty()) throw Error(ErrorKind::insufficient_data, "empty dr/dR table");
  std::vector<double> x, y;
  for (const auto& p : table) {
    x.push_back(p.delta_r);
    y.push_back(p.delta_R);
  }
  if (mode == ShiftFit::through_origin || table.size() < 2)
    return {stats::fit_linear_through_origin(x, y).slope, 0.0};
  const stats::LineFit line = stats::least_squares_line(x, y);
  return {line.slope, line.intercept};
}

inline int map_delta_r_to_delta_R(double delta_r, std::span<const ShiftPair> table = kShiftTable,
                                  ShiftFit mode = ShiftFit::affine) {
  return fit_shift_map(table, mode).apply(delta_r);
}

// ---------------------------------------------------------------------------
// Co-movement degrees

struct ComovementEstimate {
  double H_M = 0.0;
  std::vector<std::string> sector_ids;  // sorted
  std::vector<double> H_j;              // aligned with sector_ids
};

/// H = <zeta> * <v_d - v_n> over a set of normalized return columns.
/// zeta(t) is the fraction of stocks moving with the dominating trend, the
/// trend whose squared-return amplitude is larger.
inline double comovement_degree(std::span<const std::vector<double>* const> columns) {
  const std::size_t ns = columns.size();
  const std::size_t days = columns.front()->size();
  double zeta_sum = 0.0, amp_sum = 0.0;
  for (std::size_t t = 0; t < days; ++t) {
    double vp = 0.0, vm = 0.0;
    std::size_t np = 0, nm = 0;
    for (const auto* col : columns) {
      const double r = (*col)[t];
      if (r > 0.0) {
        vp += r * r;
        ++np;
      } else if (r < 0.0) {
        vm += r * r;
        ++nm;
      }
    }
    vp /= static_cast<double>(ns);
    vm /= static_cast<double>(ns);
    std::size_t nd;
    if (vp > vm) nd = np;
    else if (vm > vp) nd = nm;
    else nd = std::max(np, nm);
    zeta_sum += static_cast<double>(nd) / static_cast<double>(ns);
    amp_sum += std::max(vp, vm) - std::min(vp, vm);
  }
  const double d = static_cast<double>(days);
  return (zeta_sum / d) * (amp_sum / d);
}

inline ComovementEstimate comovement(const ingest::ReturnsPanel& panel) {
  std::vector<std::vector<double>> normalized;
  normalized.reserve(panel.cols());
  for (std::size_t c = 0; c < panel.cols(); ++c) {
    try {
      normalized.push_back(stats::normalize(panel.columns[c]).values);
    } catch (const Error&) {
      throw Error(ErrorKind::degenerate, "column '" + panel.tickers[c] + "' has zero variance");
    }
  }
  ComovementEstimate est;
  est.sector_ids = panel.sector_ids();
  std::vector<const std::vector<double>*> all;
  for (const auto& c : normalized) all.push_back(&c);
  est.H_M = comovement_degree(all);
  for (const auto& sector : est.sector_ids) {
    std::vector<const std::vector<double>*> members;
    for (std::size_t c = 0; c < panel.cols(); ++c)
      if (panel.sector_of.at(panel.tickers[c]) == sector) members.push_back(&normalized[c]);
    if (members.size() < 2)
      throw Error(ErrorKind::validation, "sector '" + sector + "' has fewer than 2 stocks");
    est.H_j.push_back(comovement_degree(members));
  }
  return est;
}

// ---------------------------------------------------------------------------
// Information driving forces

/// S(t) = 1 where G(t) exceeds its mean, else 0.
inline std::vector<int> info_states(std::span<const double> search_volume) {
  const double m = stats::mean(search_volume);
  std::vector<int> s(search_volume.size());
  for (std::size_t t = 0; t < s.size(); ++t) s[t] = search_volume[t] > m ? 1 : 0;
  return s;
}

struct InfoForceSeries {
  std::string ticker;
  std::vector<int> states;
  std::vector<std::size_t> window_starts;
  std::vector<double> forces;  // F(t) = V1(t)/V0(t) - 1 per window start
  std::size_t tau = 0;
  std::size_t skipped_zero_baseline = 0;  // windows dropped because V0 = 0
};

/// Moving-window driving force over windows [t, t + tau). Windows lacking
/// either state are skipped.
inline InfoForceSeries info_driving_force(std::span<const int> states,
                                          std::span<const double> volumes, std::size_t tau,
                                          std::string ticker = {}) {
  if (states.size() != volumes.size())
    throw Error(ErrorKind::validation, "states and volumes differ in length");
  if (tau < 1) throw Error(ErrorKind::validation, "tau must be >= 1");
  InfoForceSeries out;
  out.ticker = std::move(ticker);
  out.states.assign(states.begin(), states.end());
  out.tau = tau;
  for (std::size_t t = 0; t + tau <= states.size(); ++t) {
    double v1 = 0.0, v0 = 0.0;
    std::size_t n1 = 0, n0 = 0;
    for (std::size_t u = t; u < t + tau; ++u) {
      if (states[u] == 1) {
        v1 += volumes[u];
        ++n1;
      } else {
        v0 += volumes[u];
        ++n0;
      }
    }
    if (n1 == 0 || n0 == 0) continue;
    v1 /= static_cast<double>(n1);
    v0 /= static_cast<double>(n0);
    if (v0 == 0.0) {
      ++out.skipped_zero_baseline;
      continue;
    }
    out.window_starts.push_back(t);
    out.forces.push_back(v1 / v0 - 1.0);
  }
  return out;
}

struct ForceAsymmetry {
  double delta_F = 0.0;
  double bull_mean = 0.0;
  double bear_mean = 0.0;
  double overall_mean = 0.0;
  std::size_t bull_windows = 0;
  std::size_t bear_windows = 0;

  /// Model asymmetry coefficient a = dF / 2.
  double asymmetry_coefficient() const { return 0.5 * delta_F; }
};

/// dF = (F_bear - F_bull) / <F>. Each window is bull or bear by the sign of
/// the cumulative market return over [t, t + tau); flat windows count only
/// toward <F>.
inline ForceAsymmetry info_force_asymmetry(std::span<const InfoForceSeries> forces,
                                           std::span<const double> market_returns) {
  ForceAsymmetry out;
  double all = 0.0, bull = 0.0, bear = 0.0;
  std::size_t count = 0;
  for (const auto& series : forces) {
    for (std::size_t w = 0; w < series.forces.size(); ++w) {
      const std::size_t t = series.window_starts[w];
      if (t + series.tau > market_returns.size())
        throw Error(ErrorKind::validation, "market returns shorter than force windows");
      double cum = 0.0;
      for (std::size_t u = t; u < t + series.tau; ++u) cum += market_returns[u];
      const double f = series.forces[w];
      all += f;
      ++count;
      if (cum > 0.0) {
        bull += f;
        ++out.bull_windows;
      } else if (cum < 0.0) {
        bear += f;
        ++out.bear_windows;
      }
    }
  }
  if (out.bull_windows == 0 || out.bear_windows == 0)
    throw Error(ErrorKind::insufficient_data, "info_force_asymmetry needs bull and bear windows");
  out.overall_mean = all / static_cast<double>(count);
  out.bull_mean = bull / static_cast<double>(out.bull_windows);
  out.bear_mean = bear / static_cast<double>(out.bear_windows);
  if (out.overall_mean == 0.0) throw Error(ErrorKind::degenerate, "mean driving force is zero");
  out.delta_F = (out.bear_mean - out.bull_mean) / out.overall_mean;
  return out;
}

struct CorrelatingTimeOptions {
  int fit_lags = 10;
  double threshold = 0.5;  // relative deviation from the power law
  int persistence = 3;     // consecutive deviating lags
  int fallback = 26;
};

struct CorrelatingTime {
  int tau = 0;
  bool deviated = false;
  stats::FitResult power_law;
};

/// First lag where the curve leaves the power law fitted on its early lags
/// by more than `threshold` for `persistence` consecutive lags.
inline CorrelatingTime correlating_time(const stats::CorrelationCurve& curve,
                                        CorrelatingTimeOptions opts = {}) {
  if (curve.size() < 30) throw Error(ErrorKind::insufficient_data, "correlating_time needs >= 30 lags");
  std::vector<double> t, y;
  for (std::size_t i = 0; i < curve.size() && curve.lags[i] <= opts.fit_lags; ++i) {
    t.push_back(curve.lags[i]);
    y.push_back(curve.values[i]);
  }
  CorrelatingTime out;
  out.power_law = stats::fit_power_law(t, y);
  int run = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double expected = out.power_law.evaluate(curve.lags[i]);
    const double dev = std::abs(curve.values[i] - expected) / expected;
    run = dev > opts.threshold ? run + 1 : 0;
    if (run == opts.persistence) {
      out.tau = curve.lags[i + 1 - static_cast<std::size_t>(opts.persistence)];
      out.deviated = true;
      return out;
    }
  }
  out.tau = opts.fallback;
  return out;
}

}  // namespace abm::calibrate
