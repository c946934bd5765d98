#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "abm/error.hpp"
#include "abm/ingest.hpp"
#include "abm/stats.hpp"

namespace abm::spectral {

/// Equal-time cross-correlation matrix, row-major.
struct CorrelationMatrix {
  std::size_t order = 0;
  std::vector<double> entries;
  std::vector<std::string> tickers;
  std::vector<std::string> sectors;  // sector id per ticker

  double operator()(std::size_t i, std::size_t j) const { return entries[i * order + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries[i * order + j]; }
};

/// Eigenpairs sorted by descending eigenvalue; eigenvectors[a] pairs with
/// eigenvalues[a] and has unit norm.
struct EigenSystem {
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> eigenvectors;

  std::size_t size() const noexcept { return eigenvalues.size(); }
};

struct Mode {
  double eigenvalue = 0.0;
  double participation_ratio = 0.0;
  std::vector<double> sector_mass;  // aligned with ModeReport::sector_ids
  std::string dominant_sector;
  /// Largest sector mass over the runner-up mass (infinite with one sector
  /// or an empty runner-up).
  double dominance_ratio = 0.0;
};

struct ModeReport {
  std::vector<std::string> sector_ids;
  std::vector<Mode> modes;
};

// ---------------------------------------------------------------------------

inline CorrelationMatrix cross_correlation(std::span<const std::vector<double>> columns,
                                           std::vector<std::string> tickers,
                                           std::vector<std::string> sectors) {
  const std::size_t n = columns.size();
  if (n == 0) throw Error(ErrorKind::validation, "no columns");
  std::vector<std::vector<double>> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (columns[i].size() != columns[0].size())
      throw Error(ErrorKind::validation, "columns differ in length");
    try {
      r[i] = stats::normalize(columns[i]).values;
    } catch (const Error& e) {
      throw Error(ErrorKind::degenerate,
                  "column '" + (i < tickers.size() ? tickers[i] : std::to_string(i)) +
                      "' cannot be normalized (" + e.what() + ")");
    }
  }
  const std::size_t len = columns[0].size();
  CorrelationMatrix c;
  c.order = n;
  c.entries.assign(n * n, 0.0);
  c.tickers = std::move(tickers);
  c.sectors = std::move(sectors);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < len; ++t) s += r[i][t] * r[j][t];
      c(i, j) = c(j, i) = s / static_cast<double>(len);
    }
  return c;
}

inline CorrelationMatrix cross_correlation(const ingest::ReturnsPanel& panel) {
  std::vector<std::string> sectors;
  for (const auto& t : panel.tickers) sectors.push_back(panel.sector_of.at(t));
  return cross_correlation(panel.columns, panel.tickers, std::move(sectors));
}

/// Symmetric eigen-decomposition by cyclic Jacobi rotations.
inline EigenSystem eigen_decompose(const CorrelationMatrix& matrix, double symmetry_tol = 1e-12) {
  const std::size_t n = matrix.order;
  if (matrix.entries.size() != n * n) throw Error(ErrorKind::validation, "matrix shape mismatch");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(matrix(i, j) - matrix(j, i)) > symmetry_tol)
        throw Error(ErrorKind::validation, "matrix is not symmetric");

  std::vector<double> a = matrix.entries;
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (off <= 1e-30 * scale * scale * static_cast<double>(n * n) || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::pair<double, std::vector<double>>> pairs(n);
  for (std::size_t j = 0; j < n; ++j) {
    pairs[j].first = A(j, j);
    auto& u = pairs[j].second;
    u.resize(n);
    for (std::size_t k = 0; k < n; ++k) u[k] = v[k * n + j];
    // sign convention: first non-negligible component positive
    for (double x : u) {
      if (std::abs(x) > 1e-12) {
        if (x < 0.0)
          for (double& y : u) y = -y;
        break;
      }
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second > y.second;
  });
  EigenSystem es;
  for (auto& [value, vec] : pairs) {
    es.eigenvalues.push_back(value);
    es.eigenvectors.push_back(std::move(vec));
  }
  return es;
}

/// Participation ratio 1 / (n sum u_i^4); 1 for a uniform vector, 1/n for a
/// basis vector.
inline double participation_ratio(std::span<const double> u) {
  double s = 0.0;
  for (double x : u) s += x * x * x * x;
  return 1.0 / (static_cast<double>(u.size()) * s);
}

/// Per-eigenvector delocalization and squared-component mass per sector.
/// `sector_of_component` gives the sector id of each vector component.
inline ModeReport mode_report(const EigenSystem& system,
                              std::span<const std::string> sector_of_component,
                              std::size_t max_modes = static_cast<std::size_t>(-1)) {
  ModeReport rep;
  {
    std::vector<std::string> ids(sector_of_component.begin(), sector_of_component.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    rep.sector_ids = std::move(ids);
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t s = 0; s < rep.sector_ids.size(); ++s) index[rep.sector_ids[s]] = s;

  const std::size_t count = std::min(max_modes, system.size());
  for (std::size_t a = 0; a < count; ++a) {
    const auto& u = system.eigenvectors[a];
    if (u.size() != sector_of_component.size())
      throw Error(ErrorKind::validation, "sector map does not cover every component");
    Mode m;
    m.eigenvalue = system.eigenvalues[a];
    m.participation_ratio = participation_ratio(u);
    m.sector_mass.assign(rep.sector_ids.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      m.sector_mass[index.at(sector_of_component[i])] += u[i] * u[i];
      total += u[i] * u[i];
    }
    for (double& x : m.sector_mass) x /= total;
    const auto top = std::max_element(m.sector_mass.begin(), m.sector_mass.end());
    m.dominant_sector = rep.sector_ids[static_cast<std::size_t>(top - m.sector_mass.begin())];
    double runner_up = 0.0;
    for (auto it = m.sector_mass.begin(); it != m.sector_mass.end(); ++it)
      if (it != top) runner_up = std::max(runner_up, *it);
    m.dominance_ratio = runner_up > 0.0 ? *top / runner_up : INFINITY;
    rep.modes.push_back(std::move(m));
  }
  return rep;
}

/// Bulk edges (1 -+ sqrt(n/T))^2 of the eigenvalue density of a correlation
/// matrix of n independent series of length T.
inline std::pair<double, double> marchenko_pastur_bounds(std::size_t n, std::size_t T) {
  if (n < 1 || T <= n)
    throw Error(ErrorKind::unsupported_regime, "Marchenko-Pastur bounds need T > n >= 1");
  const double q = std::sqrt(static_cast<double>(n) / static_cast<double>(T));
  return {(1.0 - q) * (1.0 - q), (1.0 + q) * (1.0 + q)};
}

/// Component order grouped by sector id, then ticker.
inline std::vector<std::size_t> sector_order(std::span<const std::string> tickers,
                                             std::span<const std::string> sectors) {
  std::vector<std::size_t> idx(tickers.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(sectors[a], tickers[a]) < std::tie(sectors[b], tickers[b]);
  });
  return idx;
}

}  // namespace abm::spectral
