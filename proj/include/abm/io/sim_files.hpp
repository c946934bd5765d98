#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "abm/ingest.hpp"
#include "abm/sim/output.hpp"

namespace abm::io {

/// returns.csv: day,R and, for model C, one column per stock. Days are
/// numbered from 1 after warmup.
inline void write_returns(std::ostream& out, const sim::SimOutput& s) {
  using ingest::csv::format_double;
  out << "day,R";
  for (std::size_t k = 0; k < s.stock_returns.size(); ++k) out << ',' << sim::stock_ticker(k);
  out << '\n';
  for (std::size_t t = 0; t < s.days(); ++t) {
    out << t + 1 << ',' << format_double(s.returns[t]);
    for (const auto& col : s.stock_returns) out << ',' << format_double(col[t]);
    out << '\n';
  }
}

/// diagnostics.csv: day plus every trace the model produced.
inline void write_diagnostics(std::ostream& out, const sim::SimOutput& s) {
  using ingest::csv::format_double;
  const auto& d = s.diagnostics;
  const std::pair<const char*, const std::vector<double>*> traces[] = {
      {"P_trade", &d.trade_prob}, {"D", &d.herding}, {"S", &d.info_state}, {"F_mean", &d.mean_force}};
  std::vector<std::pair<const char*, const std::vector<double>*>> used;
  for (const auto& tr : traces)
    if (!tr.second->empty()) used.push_back(tr);
  out << "day";
  for (const auto& tr : used) out << ',' << tr.first;
  out << '\n';
  for (std::size_t t = 0; t < s.days(); ++t) {
    out << t + 1;
    for (const auto& tr : used) out << ',' << format_double((*tr.second)[t]);
    out << '\n';
  }
}

/// Per-stock returns of a model C run as a panel; sectors are labelled 1..n_sec.
inline ingest::ReturnsPanel to_panel(const sim::SimOutput& s) {
  ingest::ReturnsPanel p;
  for (std::size_t k = 0; k < s.stock_returns.size(); ++k) {
    const std::string tk = sim::stock_ticker(k);
    p.tickers.push_back(tk);
    p.sector_of[tk] = std::to_string(s.stock_sector[k] + 1);
    p.columns.push_back(s.stock_returns[k]);
  }
  for (std::size_t t = 0; t < s.days(); ++t) p.dates.push_back(std::to_string(t + 1));
  return p;
}

}  // namespace abm::io
