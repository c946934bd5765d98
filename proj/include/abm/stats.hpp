#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "abm/error.hpp"

namespace abm::stats {

/// r(t) = (R(t) - <R>) / sigma with the population standard deviation.
struct NormalizedReturns {
  std::vector<double> values;
  double mean_removed = 0.0;
  double sigma = 1.0;
};

enum class Estimator { volatility_autocorrelation, return_volatility };

inline const char* to_string(Estimator e) {
  return e == Estimator::volatility_autocorrelation ? "A" : "L";
}

struct CorrelationCurve {
  std::vector<int> lags;
  std::vector<double> values;
  Estimator estimator_id = Estimator::volatility_autocorrelation;

  std::size_t size() const noexcept { return lags.size(); }
  /// Value at a given lag; lags are contiguous from lags.front().
  double at_lag(int lag) const { return values.at(static_cast<std::size_t>(lag - lags.front())); }
};

enum class FitModel { exponential, power_law, linear_through_origin };

inline const char* to_string(FitModel m) {
  switch (m) {
    case FitModel::exponential: return "exponential";
    case FitModel::power_law: return "power_law";
    case FitModel::linear_through_origin: return "linear_through_origin";
  }
  return "?";
}

/// Exponential: value = amplitude * exp(-t / tau).
/// Power law: value = amplitude * t^exponent.
/// Linear through origin: value = slope * t.
struct FitResult {
  FitModel model = FitModel::exponential;
  double amplitude = 0.0;
  double tau = 0.0;
  double exponent = 0.0;
  double slope = 0.0;
  double residual_rms = 0.0;

  double evaluate(double t) const {
    switch (model) {
      case FitModel::exponential: return amplitude * std::exp(-t / tau);
      case FitModel::power_law: return amplitude * std::pow(t, exponent);
      case FitModel::linear_through_origin: return slope * t;
    }
    return 0.0;
  }
};

// ---------------------------------------------------------------------------
// Moments

inline double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Population variance.
inline double variance(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

inline double excess_kurtosis(std::span<const double> x) {
  const double m = mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= static_cast<double>(x.size());
  m4 /= static_cast<double>(x.size());
  if (m2 == 0.0) throw Error(ErrorKind::degenerate, "kurtosis of a constant series");
  return m4 / (m2 * m2) - 3.0;
}

// ---------------------------------------------------------------------------
// Normalization

inline NormalizedReturns normalize(std::span<const double> returns) {
  if (returns.size() < 2)
    throw Error(ErrorKind::insufficient_data, "normalize needs at least 2 values");
  NormalizedReturns out;
  out.mean_removed = mean(returns);
  double s = 0.0;
  for (double v : returns) s += (v - out.mean_removed) * (v - out.mean_removed);
  out.sigma = std::sqrt(s / static_cast<double>(returns.size()));
  if (!(out.sigma > 0.0) || !std::isfinite(out.sigma))
    throw Error(ErrorKind::degenerate, "series has zero variance");
  out.values.resize(returns.size());
  for (std::size_t i = 0; i < returns.size(); ++i)
    out.values[i] = (returns[i] - out.mean_removed) / out.sigma;
  return out;
}

// ---------------------------------------------------------------------------
// Correlation functions

namespace detail {
inline void check_lag(std::size_t length, int max_lag, const char* what) {
  if (max_lag < 1 || static_cast<std::size_t>(max_lag) * 4 >= length)
    throw Error(ErrorKind::insufficient_data,
                std::string(what) + ": max_lag must satisfy 1 <= max_lag < length/4 (length " +
                    std::to_string(length) + ", max_lag " + std::to_string(max_lag) + ")");
}
}  // namespace detail

/// Volatility autocorrelation
///   A(t) = [<|r(t')| |r(t'+t)|> - <|r|>^2] / (<|r|^2> - <|r|>^2).
/// Lagged products average over the T - t fully overlapping pairs; the
/// one-point moments use the whole series.
inline CorrelationCurve autocorrelation_abs(std::span<const double> r, int max_lag) {
  detail::check_lag(r.size(), max_lag, "autocorrelation_abs");
  const std::size_t n = r.size();
  std::vector<double> a(n);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::abs(r[i]);
    m1 += a[i];
    m2 += a[i] * a[i];
  }
  m1 /= static_cast<double>(n);
  m2 /= static_cast<double>(n);
  const double a0 = m2 - m1 * m1;
  if (!(a0 > 0.0)) throw Error(ErrorKind::degenerate, "autocorrelation_abs: A0 = 0");

  CorrelationCurve curve;
  curve.estimator_id = Estimator::volatility_autocorrelation;
  for (int lag = 1; lag <= max_lag; ++lag) {
    const std::size_t pairs = n - static_cast<std::size_t>(lag);
    double s = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) s += a[i] * a[i + lag];
    curve.lags.push_back(lag);
    curve.values.push_back((s / static_cast<double>(pairs) - m1 * m1) / a0);
  }
  return curve;
}

/// Return-volatility correlation L(t) = <r(t') |r(t'+t)|^2> / <|r|^2>^2.
inline CorrelationCurve return_volatility_correlation(std::span<const double> r, int max_lag) {
  detail::check_lag(r.size(), max_lag, "return_volatility_correlation");
  const std::size_t n = r.size();
  std::vector<double> sq(n);
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sq[i] = r[i] * r[i];
    m2 += sq[i];
  }
  m2 /= static_cast<double>(n);
  const double z = m2 * m2;
  if (!(z > 0.0)) throw Error(ErrorKind::degenerate, "return_volatility_correlation: Z = 0");

  CorrelationCurve curve;
  curve.estimator_id = Estimator::return_volatility;
  for (int lag = 1; lag <= max_lag; ++lag) {
    const std::size_t pairs = n - static_cast<std::size_t>(lag);
    double s = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) s += r[i] * sq[i + lag];
    curve.lags.push_back(lag);
    curve.values.push_back(s / static_cast<double>(pairs) / z);
  }
  return curve;
}

/// Lag-wise mean and standard error over an ensemble of curves.
struct EnsembleCurve {
  CorrelationCurve mean;
  std::vector<double> standard_error;
};

inline EnsembleCurve ensemble_mean(std::span<const CorrelationCurve> curves) {
  if (curves.empty()) throw Error(ErrorKind::insufficient_data, "empty ensemble");
  EnsembleCurve out;
  out.mean.lags = curves.front().lags;
  out.mean.estimator_id = curves.front().estimator_id;
  const std::size_t lags = out.mean.lags.size();
  const double k = static_cast<double>(curves.size());
  out.mean.values.assign(lags, 0.0);
  out.standard_error.assign(lags, 0.0);
  for (const auto& c : curves) {
    if (c.lags != out.mean.lags)
      throw Error(ErrorKind::validation, "ensemble curves have different lags");
    for (std::size_t i = 0; i < lags; ++i) out.mean.values[i] += c.values[i] / k;
  }
  if (curves.size() > 1) {
    for (std::size_t i = 0; i < lags; ++i) {
      double ss = 0.0;
      for (const auto& c : curves) {
        const double d = c.values[i] - out.mean.values[i];
        ss += d * d;
      }
      out.standard_error[i] = std::sqrt(ss / (k - 1.0) / k);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hurst exponent

/// Least-squares line y = a + b x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};

inline LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::degenerate, "line fit with constant abscissa");
  return {my - sxy / sxx * mx, sxy / sxx};
}

/// Detrended fluctuation function F(s) for DFA-1 on non-overlapping windows.
inline double dfa_fluctuation(std::span<const double> profile, std::size_t window) {
  const std::size_t segments = profile.size() / window;
  // Abscissa 0..s-1 is shared by every window.
  const double s = static_cast<double>(window);
  const double mx = (s - 1.0) / 2.0;
  const double sxx = s * (s * s - 1.0) / 12.0;
  double total = 0.0;
  for (std::size_t seg = 0; seg < segments; ++seg) {
    const double* y = profile.data() + seg * window;
    double my = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < window; ++i) my += y[i];
    my /= s;
    for (std::size_t i = 0; i < window; ++i) sxy += (static_cast<double>(i) - mx) * (y[i] - my);
    const double b = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
      const double e = y[i] - my - b * (static_cast<double>(i) - mx);
      ss += e * e;
    }
    total += ss / s;
  }
  return std::sqrt(total / static_cast<double>(segments));
}

/// Hurst exponent by first-order detrended fluctuation analysis over window
/// sizes 16..length/8 (log-spaced, four per octave).
inline double hurst_exponent(std::span<const double> values) {
  constexpr std::size_t kMinLength = 512;
  if (values.size() < kMinLength)
    throw Error(ErrorKind::insufficient_data, "hurst_exponent needs at least 512 values");
  const double m = mean(values);
  std::vector<double> profile(values.size());
  double acc = 0.0;
  bool constant = true;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i] - m;
    profile[i] = acc;
    constant = constant && values[i] == values[0];
  }
  if (constant) throw Error(ErrorKind::degenerate, "hurst_exponent of a constant series");

  std::vector<double> log_s, log_f;
  const std::size_t max_window = values.size() / 8;
  std::size_t last = 0;
  for (double s = 16.0; s <= static_cast<double>(max_window) + 1e-9; s *= std::pow(2.0, 0.25)) {
    const auto window = static_cast<std::size_t>(std::lround(s));
    if (window == last || window > max_window) continue;
    last = window;
    const double f = dfa_fluctuation(profile, window);
    if (!(f > 0.0)) continue;
    log_s.push_back(std::log(static_cast<double>(window)));
    log_f.push_back(std::log(f));
  }
  if (log_s.size() < 2) throw Error(ErrorKind::insufficient_data, "too few DFA window sizes");
  return least_squares_line(log_s, log_f).slope;
}

// ---------------------------------------------------------------------------
// Tail exponent

/// Hill estimator of the cumulative-distribution tail exponent of |x| using
/// the largest tail_fraction of the sample.
inline double tail_exponent(std::span<const double> values, double tail_fraction = 0.05) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 0.2))
    throw Error(ErrorKind::validation, "tail_fraction must lie in (0, 0.2]");
  const auto k = static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(values.size())));
  if (k < 100 || k >= values.size())
    throw Error(ErrorKind::insufficient_data,
                "tail_exponent needs at least 100 tail points, got " + std::to_string(k));
  std::vector<double> a(values.size());
  std::transform(values.begin(), values.end(), a.begin(), [](double v) { return std::abs(v); });
  std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k), a.end(), std::greater<>());
  const double threshold = a[k];
  if (!(threshold > 0.0))
    throw Error(ErrorKind::degenerate, "tail threshold is zero; too many zero values");
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(a[i] / threshold);
  if (!(s > 0.0)) throw Error(ErrorKind::degenerate, "tail values are all equal");
  return static_cast<double>(k) / s;
}

// ---------------------------------------------------------------------------
// Curve fits

namespace detail {
inline double residual_rms(const FitResult& fit, std::span<const double> t,
                           std::span<const double> y) {
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = y[i] - fit.evaluate(t[i]);
    ss += e * e;
  }
  return std::sqrt(ss / static_cast<double>(t.size()));
}
}  // namespace detail

/// Fits value = c exp(-t/tau) by least squares on ln|value|; the sign of c is
/// the common sign of the curve.
inline FitResult fit_exponential(const CorrelationCurve& curve) {
  if (curve.size() < 2) throw Error(ErrorKind::insufficient_data, "exponential fit needs 2 points");
  const bool negative = curve.values.front() < 0.0;
  std::vector<double> t, logy;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double v = curve.values[i];
    if (v == 0.0 || (v < 0.0) != negative)
      throw Error(ErrorKind::fit_domain,
                  "curve changes sign at lag " + std::to_string(curve.lags[i]));
    t.push_back(curve.lags[i]);
    logy.push_back(std::log(std::abs(v)));
  }
  const LineFit line = least_squares_line(t, logy);
  if (!(line.slope < 0.0))
    throw Error(ErrorKind::fit_domain, "curve magnitude does not decay");
  FitResult fit;
  fit.model = FitModel::exponential;
  fit.amplitude = (negative ? -1.0 : 1.0) * std::exp(line.intercept);
  fit.tau = -1.0 / line.slope;
  std::vector<double> y(curve.values.begin(), curve.values.end());
  fit.residual_rms = detail::residual_rms(fit, t, y);
  return fit;
}

/// Fits value = amplitude * t^exponent by least squares in log-log space.
inline FitResult fit_power_law(std::span<const double> t, std::span<const double> y) {
  if (t.size() < 2) throw Error(ErrorKind::insufficient_data, "power-law fit needs 2 points");
  std::vector<double> lt, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0 && y[i] > 0.0))
      throw Error(ErrorKind::fit_domain, "power-law fit needs positive values");
    lt.push_back(std::log(t[i]));
    ly.push_back(std::log(y[i]));
  }
  const LineFit line = least_squares_line(lt, ly);
  FitResult fit;
  fit.model = FitModel::power_law;
  fit.amplitude = std::exp(line.intercept);
  fit.exponent = line.slope;
  fit.residual_rms = detail::residual_rms(fit, t, y);
  return fit;
}

inline FitResult fit_linear_through_origin(std::span<const double> x, std::span<const double> y) {
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::degenerate, "all abscissae are zero");
  FitResult fit;
  fit.model = FitModel::linear_through_origin;
  fit.slope = sxy / sxx;
  fit.residual_rms = detail::residual_rms(fit, x, y);
  return fit;
}

}  // namespace abm::stats
