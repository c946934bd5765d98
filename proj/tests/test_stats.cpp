#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "abm/stats.hpp"

using namespace abm;
using namespace abm::stats;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  std::vector<double> x(n);
  for (auto& v : x) v = d(gen);
  return x;
}

// Direct-summation oracles, written from the definitions without sharing
// any code with the library.
double oracle_A(const std::vector<double>& r, int lag) {
  const double n = static_cast<double>(r.size());
  double m1 = 0, m2 = 0;
  for (double v : r) {
    m1 += std::fabs(v) / n;
    m2 += v * v / n;
  }
  double cross = 0;
  const std::size_t pairs = r.size() - static_cast<std::size_t>(lag);
  for (std::size_t t = 0; t < pairs; ++t) cross += std::fabs(r[t]) * std::fabs(r[t + lag]);
  cross /= static_cast<double>(pairs);
  return (cross - m1 * m1) / (m2 - m1 * m1);
}

double oracle_L(const std::vector<double>& r, int lag) {
  const double n = static_cast<double>(r.size());
  double m2 = 0;
  for (double v : r) m2 += v * v / n;
  double cross = 0;
  const std::size_t pairs = r.size() - static_cast<std::size_t>(lag);
  for (std::size_t t = 0; t < pairs; ++t) cross += r[t] * std::pow(std::fabs(r[t + lag]), 2);
  return cross / static_cast<double>(pairs) / (m2 * m2);
}

}  // namespace

TEST(Normalize, AlreadyNormalized) {
  const std::vector<double> x{1, -1, 1, -1};
  const auto r = normalize(x);
  EXPECT_EQ(r.values, x);
  EXPECT_EQ(r.sigma, 1.0);
  EXPECT_EQ(r.mean_removed, 0.0);
}

TEST(Normalize, ConstantIsDegenerate) {
  const std::vector<double> x{5, 5, 5};
  try {
    normalize(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
  }
}

TEST(Normalize, HandValuesUsePopulationSigma) {
  const std::vector<double> x{0, 2, 4};
  const auto r = normalize(x);
  EXPECT_NEAR(r.sigma, std::sqrt(8.0 / 3.0), 1e-15);
  EXPECT_NEAR(r.values[0], -1.224744871391589, 1e-12);
  EXPECT_NEAR(r.values[1], 0.0, 1e-15);
  EXPECT_NEAR(r.values[2], 1.224744871391589, 1e-12);
}

TEST(Normalize, InvariantsAndIdempotence) {
  auto x = gaussian(5000, 1);
  for (auto& v : x) v = 3.0 + 7.0 * v;
  const auto r = normalize(x);
  EXPECT_LT(std::fabs(mean(r.values)), 1e-10);
  EXPECT_NEAR(std::sqrt(variance(r.values)), 1.0, 1e-10);
  const auto twice = normalize(r.values);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(twice.values[i], r.values[i], 1e-12);
}

TEST(Autocorrelation, WhiteNoiseIsFlat) {
  const auto r = normalize(gaussian(100000, 2)).values;
  const auto A = autocorrelation_abs(r, 50);
  for (double v : A.values) EXPECT_LT(std::fabs(v), 0.02);
}

TEST(Autocorrelation, PeriodTwo) {
  std::vector<double> r(1000);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = (i % 2 ? 3.0 : 1.0) * (i % 3 ? 1 : -1);
  const auto A = autocorrelation_abs(r, 10);
  EXPECT_NEAR(A.at_lag(1), oracle_A(r, 1), 1e-12);
  EXPECT_NEAR(A.at_lag(2), oracle_A(r, 2), 1e-12);
  EXPECT_NEAR(A.at_lag(1), -1.0, 1e-2);
  EXPECT_NEAR(A.at_lag(2), 1.0, 1e-2);
}

TEST(Autocorrelation, MatchesOracleAndIgnoresSign) {
  auto r = gaussian(1000, 3);
  for (std::size_t i = 1; i < r.size(); ++i) r[i] *= 1.0 + 0.8 * std::fabs(r[i - 1]);
  const auto A = autocorrelation_abs(r, 100);
  for (int lag = 1; lag <= 100; ++lag) EXPECT_NEAR(A.at_lag(lag), oracle_A(r, lag), 1e-12);
  auto neg = r;
  for (auto& v : neg) v = -v;
  EXPECT_EQ(autocorrelation_abs(neg, 100).values, A.values);
}

TEST(Autocorrelation, LagBoundEnforced) {
  const auto r = gaussian(100, 4);
  EXPECT_THROW(autocorrelation_abs(r, 25), Error);
  EXPECT_NO_THROW(autocorrelation_abs(r, 24));
  EXPECT_THROW(return_volatility_correlation(r, 0), Error);
}

TEST(ReturnVolatility, SymmetricNoiseIsFlat) {
  const auto r = normalize(gaussian(100000, 5)).values;
  const auto L = return_volatility_correlation(r, 15);
  for (double v : L.values) EXPECT_LT(std::fabs(v), 0.05);
}

TEST(ReturnVolatility, HandSeries) {
  const std::vector<double> r{1, -2, 1, 2, -1, -2, 1, 2};
  const auto L = return_volatility_correlation(r, 1);
  // By hand: mean r^2 = 20/8; pairs (1,4) (-2,1) (1,4) (2,1) (-1,4) (-2,1) (1,4)
  const double m2 = 20.0 / 8.0;
  const double cross = (4 - 2 + 4 + 2 - 4 - 2 + 4) / 7.0;
  EXPECT_NEAR(L.at_lag(1), cross / (m2 * m2), 1e-15);
  EXPECT_NEAR(L.at_lag(1), oracle_L(r, 1), 1e-15);
}

TEST(ReturnVolatility, MatchesOracleAndFlipsSign) {
  auto r = gaussian(1000, 6);
  for (std::size_t i = 1; i < r.size(); ++i) r[i] *= 1.0 - 0.3 * r[i - 1] / (1 + std::fabs(r[i - 1]));
  const auto L = return_volatility_correlation(r, 100);
  for (int lag = 1; lag <= 100; ++lag) EXPECT_NEAR(L.at_lag(lag), oracle_L(r, lag), 1e-12);
  auto neg = r;
  for (auto& v : neg) v = -v;
  const auto Ln = return_volatility_correlation(neg, 100);
  for (std::size_t i = 0; i < L.size(); ++i) EXPECT_NEAR(Ln.values[i], -L.values[i], 1e-12);
}

TEST(Ensemble, MeanAndStandardError) {
  CorrelationCurve a{{1, 2}, {1.0, 2.0}}, b{{1, 2}, {3.0, 2.0}};
  const std::vector<CorrelationCurve> cs{a, b};
  const auto e = ensemble_mean(cs);
  EXPECT_EQ(e.mean.values, (std::vector<double>{2.0, 2.0}));
  EXPECT_NEAR(e.standard_error[0], 1.0, 1e-15);  // sd sqrt(2) over sqrt(2)
  EXPECT_EQ(e.standard_error[1], 0.0);
}

TEST(Hurst, WhiteNoise) {
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    const auto x = gaussian(1 << 15, seed);
    EXPECT_NEAR(hurst_exponent(x), 0.5, 0.05) << seed;
  }
}

TEST(Hurst, IntegratedNoiseIsAboveOne) {
  auto x = gaussian(1 << 14, 10);
  for (std::size_t i = 1; i < x.size(); ++i) x[i] += x[i - 1];
  EXPECT_GT(hurst_exponent(x), 1.0);
}

TEST(Hurst, Preconditions) {
  EXPECT_THROW(hurst_exponent(gaussian(511, 1)), Error);
  const std::vector<double> flat(1024, 2.0);
  try {
    hurst_exponent(flat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
  }
}

TEST(TailExponent, ParetoRecovered) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(100000);
  // Inverse CDF of P(X > x) = x^-3 on x >= 1, random sign.
  for (auto& v : x) v = std::pow(1.0 - u(gen), -1.0 / 3.0) * (u(gen) < 0.5 ? -1 : 1);
  EXPECT_NEAR(tail_exponent(x, 0.05), 3.0, 0.15);
}

TEST(TailExponent, ScaleInvariant) {
  const auto x = gaussian(20000, 13);
  auto y = x;
  for (auto& v : y) v *= 37.5;
  EXPECT_NEAR(tail_exponent(x), tail_exponent(y), 1e-12);
}

TEST(TailExponent, LightTailDriftsUp) {
  std::mt19937_64 gen(14);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(100000);
  for (auto& v : x) v = e(gen);
  EXPECT_GT(tail_exponent(x, 0.01), tail_exponent(x, 0.10));
}

TEST(TailExponent, TooFewTailPoints) {
  try {
    tail_exponent(gaussian(1000, 1), 0.05);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::insufficient_data);
  }
  EXPECT_THROW(tail_exponent(gaussian(10000, 1), 0.3), Error);
}

TEST(Fit, ExactExponential) {
  CorrelationCurve c;
  for (int t = 1; t <= 15; ++t) {
    c.lags.push_back(t);
    c.values.push_back(-0.2 * std::exp(-t / 5.0));
  }
  const auto f = fit_exponential(c);
  EXPECT_NEAR(f.amplitude, -0.2, 1e-9);
  EXPECT_NEAR(f.tau, 5.0, 1e-9);
  EXPECT_LT(f.residual_rms, 1e-12);

  // Noisy positive curve: same sign, worse residual.
  std::mt19937_64 gen(15);
  std::uniform_real_distribution<double> u(0.01, 0.3);
  CorrelationCurve noise = c;
  for (auto& v : noise.values) v = u(gen) * std::exp(-0.01 * v);
  std::sort(noise.values.rbegin(), noise.values.rend());
  noise.values.back() *= 0.2;
  const auto g = fit_exponential(noise);
  EXPECT_GT(g.residual_rms, f.residual_rms);
}

TEST(Fit, SignChangeIsFitDomainError) {
  CorrelationCurve c{{1, 2, 3}, {0.1, -0.05, 0.01}};
  try {
    fit_exponential(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::fit_domain);
  }
}

TEST(Fit, PowerLawAndLine) {
  std::vector<double> t, y, z;
  for (int i = 1; i <= 10; ++i) {
    t.push_back(i);
    y.push_back(0.7 * std::pow(i, -0.4));
    z.push_back(2.5 * i);
  }
  const auto p = fit_power_law(t, y);
  EXPECT_NEAR(p.amplitude, 0.7, 1e-12);
  EXPECT_NEAR(p.exponent, -0.4, 1e-12);
  EXPECT_NEAR(fit_linear_through_origin(t, z).slope, 2.5, 1e-14);
  y[3] = 0.0;
  EXPECT_THROW(fit_power_law(t, y), Error);
}

TEST(Moments, KurtosisOfGaussianNearZero) {
  EXPECT_NEAR(excess_kurtosis(gaussian(200000, 16)), 0.0, 0.05);
}
