#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "abm/error.hpp"

namespace abm::ingest {

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD).
inline bool try_parse_date(std::string_view s, Date& out) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  int y = 0;
  unsigned m = 0, d = 0;
  auto ok = [](std::from_chars_result r, const char* end) {
    return r.ec == std::errc() && r.ptr == end;
  };
  if (!ok(std::from_chars(s.data(), s.data() + 4, y), s.data() + 4)) return false;
  if (!ok(std::from_chars(s.data() + 5, s.data() + 7, m), s.data() + 7)) return false;
  if (!ok(std::from_chars(s.data() + 8, s.data() + 10, d), s.data() + 10)) return false;
  out = Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  return out.ok();
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

inline long days_between(const Date& a, const Date& b) {
  return (std::chrono::sys_days{b} - std::chrono::sys_days{a}).count();
}

/// Daily closing prices and volumes of one index.
struct IndexSeries {
  std::vector<Date> dates;
  std::vector<double> close;
  std::vector<double> volume;

  std::size_t size() const noexcept { return dates.size(); }
  bool operator==(const IndexSeries&) const = default;
};

/// Logarithmic returns R(t) = ln(Y(t)/Y(t-1)), dated by day t. `volume` is
/// empty when the source had no volumes.
struct ReturnSeries {
  std::vector<Date> dates;
  std::vector<double> returns;
  std::vector<double> volume;

  std::size_t size() const noexcept { return returns.size(); }
  bool has_volume() const noexcept { return !volume.empty(); }
};

/// Multi-stock returns, one column per ticker. Date labels are kept verbatim
/// so simulated panels indexed by day number load as well.
struct ReturnsPanel {
  std::vector<std::string> tickers;
  std::map<std::string, std::string> sector_of;
  std::vector<std::string> dates;
  std::vector<std::vector<double>> columns;  // [ticker][date]

  std::size_t rows() const noexcept { return dates.size(); }
  std::size_t cols() const noexcept { return tickers.size(); }

  const std::vector<double>& column(const std::string& ticker) const {
    const auto it = std::find(tickers.begin(), tickers.end(), ticker);
    if (it == tickers.end()) throw Error(ErrorKind::validation, "no ticker '" + ticker + "'");
    return columns[static_cast<std::size_t>(it - tickers.begin())];
  }

  /// Distinct sector ids in sorted order.
  std::vector<std::string> sector_ids() const {
    std::set<std::string> s;
    for (const auto& t : tickers) s.insert(sector_of.at(t));
    return {s.begin(), s.end()};
  }

  bool operator==(const ReturnsPanel&) const = default;
};

/// Weekly internet search volume G_k(t) of one ticker.
struct SearchSeries {
  std::string ticker;
  std::vector<Date> weeks;
  std::vector<double> volume;

  std::size_t size() const noexcept { return weeks.size(); }
  bool operator==(const SearchSeries&) const = default;
};

/// Weeks in the default correlating time; search series must cover at least
/// twice this so moving windows exist.
inline constexpr std::size_t kDefaultTauWeeks = 26;

// ---------------------------------------------------------------------------
// CSV primitives

namespace csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Locale-independent decimal parse; false on empty or trailing garbage.
inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(out);
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Data rows of a headered CSV with their 1-based line numbers. Blank lines
/// are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::size_t column_index(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw Error(ErrorKind::parse, "missing column '" + name + "' in header");
    return static_cast<std::size_t>(it - header.begin());
  }
};

inline Table read(std::istream& in, bool require_rectangular = true) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (require_rectangular && fields.size() != t.header.size())
      throw Error(ErrorKind::parse, "row " + std::to_string(line_no) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (t.header.empty()) throw Error(ErrorKind::parse, "empty file");
  return t;
}

inline std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::validation, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace csv

namespace detail {
inline std::string row_tag(std::size_t line) { return "row " + std::to_string(line); }

inline Date date_field(const std::string& s, std::size_t line) {
  Date d;
  if (!try_parse_date(s, d))
    throw Error(ErrorKind::parse, row_tag(line) + ": bad ISO-8601 date '" + s + "'");
  return d;
}

inline double number_field(const std::string& s, std::size_t line, const char* what) {
  double v;
  if (!csv::parse_double(s, v))
    throw Error(ErrorKind::parse, row_tag(line) + ": bad " + what + " '" + s + "'");
  return v;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Index series: date,close,volume

inline IndexSeries read_index_series(std::istream& in) {
  const csv::Table t = csv::read(in);
  const std::size_t date_col = t.column_index("date");
  const std::size_t close_col = t.column_index("close");
  const bool has_volume =
      std::find(t.header.begin(), t.header.end(), "volume") != t.header.end();
  const std::size_t vol_col = has_volume ? t.column_index("volume") : 0;

  struct Row {
    Date date;
    double close, volume;
    std::size_t line;
  };
  std::vector<Row> rows;
  rows.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::size_t line = t.line_numbers[i];
    Row row{detail::date_field(r[date_col], line),
            detail::number_field(r[close_col], line, "close"),
            has_volume ? detail::number_field(r[vol_col], line, "volume") : 0.0, line};
    if (!(row.close > 0.0))
      throw Error(ErrorKind::validation, detail::row_tag(line) + ": close must be positive");
    if (row.volume < 0.0)
      throw Error(ErrorKind::validation, detail::row_tag(line) + ": negative volume");
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].date == rows[i - 1].date)
      throw Error(ErrorKind::validation, detail::row_tag(rows[i].line) + ": duplicate date " +
                                             format_date(rows[i].date));
  if (rows.size() < 2) throw Error(ErrorKind::validation, "index series needs at least 2 rows");

  IndexSeries s;
  for (const auto& r : rows) {
    s.dates.push_back(r.date);
    s.close.push_back(r.close);
    if (has_volume) s.volume.push_back(r.volume);
  }
  return s;
}

inline IndexSeries load_index_series(const std::filesystem::path& path) {
  auto in = csv::open(path);
  return read_index_series(in);
}

inline void write_index_series(std::ostream& out, const IndexSeries& s) {
  out << (s.volume.empty() ? "date,close\n" : "date,close,volume\n");
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_date(s.dates[i]) << ',' << csv::format_double(s.close[i]);
    if (!s.volume.empty()) out << ',' << csv::format_double(s.volume[i]);
    out << '\n';
  }
}

inline ReturnSeries log_returns(const IndexSeries& s) {
  ReturnSeries r;
  for (std::size_t t = 1; t < s.size(); ++t) {
    r.dates.push_back(s.dates[t]);
    r.returns.push_back(std::log(s.close[t] / s.close[t - 1]));
    if (!s.volume.empty()) r.volume.push_back(s.volume[t]);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Sector map: ticker,sector_id

inline std::map<std::string, std::string> read_sector_map(std::istream& in) {
  const csv::Table t = csv::read(in);
  const std::size_t tc = t.column_index("ticker");
  const std::size_t sc = t.column_index("sector_id");
  std::map<std::string, std::string> m;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (r[tc].empty() || r[sc].empty())
      throw Error(ErrorKind::parse, detail::row_tag(t.line_numbers[i]) + ": empty field");
    if (!m.emplace(r[tc], r[sc]).second)
      throw Error(ErrorKind::validation,
                  detail::row_tag(t.line_numbers[i]) + ": duplicate ticker '" + r[tc] + "'");
  }
  return m;
}

inline void write_sector_map(std::ostream& out, const std::vector<std::string>& tickers,
                             const std::map<std::string, std::string>& sector_of) {
  out << "ticker,sector_id\n";
  for (const auto& t : tickers) out << t << ',' << sector_of.at(t) << '\n';
}

// ---------------------------------------------------------------------------
// Returns panel: date,TICKER1,...,TICKERn

struct PanelOptions {
  /// Fill gaps of at most two consecutive missing cells with zero returns.
  bool forward_fill = false;
};

inline bool is_missing_cell(const std::string& s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

inline ReturnsPanel read_returns_panel(std::istream& panel_in, std::istream& sectors_in,
                                       PanelOptions opts = {}) {
  const csv::Table t = csv::read(panel_in);
  if (t.header.size() < 2) throw Error(ErrorKind::parse, "panel needs a date and a ticker column");
  ReturnsPanel p;
  p.sector_of = read_sector_map(sectors_in);
  p.tickers.assign(t.header.begin() + 1, t.header.end());
  {
    std::set<std::string> seen;
    for (const auto& tk : p.tickers) {
      if (!seen.insert(tk).second) throw Error(ErrorKind::validation, "duplicate ticker '" + tk + "'");
      if (!p.sector_of.count(tk))
        throw Error(ErrorKind::validation, "ticker '" + tk + "' has no sector id");
    }
  }
  // Keep only the panel's tickers in the sector map.
  std::map<std::string, std::string> used;
  for (const auto& tk : p.tickers) used.emplace(tk, p.sector_of.at(tk));
  p.sector_of = std::move(used);

  p.columns.assign(p.tickers.size(), {});
  std::vector<std::size_t> gap(p.tickers.size(), 0);
  std::set<std::string> labels;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::size_t line = t.line_numbers[i];
    if (!labels.insert(r[0]).second)
      throw Error(ErrorKind::validation, detail::row_tag(line) + ": duplicate date '" + r[0] + "'");
    p.dates.push_back(r[0]);
    for (std::size_t c = 0; c < p.tickers.size(); ++c) {
      const std::string& cell = r[c + 1];
      if (is_missing_cell(cell)) {
        if (!opts.forward_fill)
          throw Error(ErrorKind::validation,
                      detail::row_tag(line) + ": missing value for '" + p.tickers[c] + "'");
        if (++gap[c] > 2)
          throw Error(ErrorKind::validation, detail::row_tag(line) + ": gap longer than 2 days for '" +
                                                 p.tickers[c] + "'");
        p.columns[c].push_back(0.0);
      } else {
        gap[c] = 0;
        p.columns[c].push_back(detail::number_field(cell, line, "return"));
      }
    }
  }
  if (p.rows() < 2) throw Error(ErrorKind::validation, "panel needs at least 2 dates");
  return p;
}

inline ReturnsPanel load_returns_panel(const std::filesystem::path& panel_path,
                                       const std::filesystem::path& sector_path,
                                       PanelOptions opts = {}) {
  auto pin = csv::open(panel_path);
  auto sin = csv::open(sector_path);
  return read_returns_panel(pin, sin, opts);
}

inline void write_returns_panel(std::ostream& out, const ReturnsPanel& p,
                                const std::string& date_header = "date") {
  out << date_header;
  for (const auto& tk : p.tickers) out << ',' << tk;
  out << '\n';
  for (std::size_t r = 0; r < p.rows(); ++r) {
    out << p.dates[r];
    for (const auto& col : p.columns) out << ',' << csv::format_double(col[r]);
    out << '\n';
  }
}

/// Ticker-keyed content comparison, insensitive to column order.
inline bool same_content(const ReturnsPanel& a, const ReturnsPanel& b) {
  if (a.dates != b.dates || a.sector_of != b.sector_of || a.cols() != b.cols()) return false;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    const auto it = std::find(b.tickers.begin(), b.tickers.end(), a.tickers[c]);
    if (it == b.tickers.end()) return false;
    if (a.columns[c] != b.columns[static_cast<std::size_t>(it - b.tickers.begin())]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Search volumes: week_start,ticker,volume

/// Restricts every series to the weeks present in all of them.
inline std::vector<SearchSeries> align_search_series(std::vector<SearchSeries> series) {
  if (series.size() < 2) return series;
  std::vector<Date> common = series.front().weeks;
  for (std::size_t i = 1; i < series.size(); ++i) {
    std::vector<Date> next;
    std::set_intersection(common.begin(), common.end(), series[i].weeks.begin(),
                          series[i].weeks.end(), std::back_inserter(next));
    common = std::move(next);
  }
  for (auto& s : series) {
    SearchSeries kept{s.ticker, {}, {}};
    for (std::size_t w = 0; w < s.size(); ++w)
      if (std::binary_search(common.begin(), common.end(), s.weeks[w])) {
        kept.weeks.push_back(s.weeks[w]);
        kept.volume.push_back(s.volume[w]);
      }
    s = std::move(kept);
  }
  return series;
}

struct SearchOptions {
  /// Intersect week labels across tickers (needed for panel-wide analyses).
  bool align = true;
  std::size_t min_weeks = 2 * kDefaultTauWeeks;
};

inline std::vector<SearchSeries> read_search_series(std::istream& in, SearchOptions opts = {}) {
  const csv::Table t = csv::read(in);
  const std::size_t wc = t.column_index("week_start");
  const std::size_t tc = t.column_index("ticker");
  const std::size_t vc = t.column_index("volume");

  struct Row {
    Date week;
    double volume;
    std::size_t line;
  };
  std::map<std::string, std::vector<Row>> by_ticker;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::size_t line = t.line_numbers[i];
    Row row{detail::date_field(r[wc], line), detail::number_field(r[vc], line, "volume"), line};
    if (row.volume < 0.0)
      throw Error(ErrorKind::validation, detail::row_tag(line) + ": negative search volume");
    if (r[tc].empty()) throw Error(ErrorKind::parse, detail::row_tag(line) + ": empty ticker");
    by_ticker[r[tc]].push_back(row);
  }

  std::vector<SearchSeries> out;
  for (auto& [ticker, rows] : by_ticker) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.week < b.week; });
    SearchSeries s{ticker, {}, {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0) {
        const long gap = days_between(rows[i - 1].week, rows[i].week);
        if (gap == 0)
          throw Error(ErrorKind::validation, detail::row_tag(rows[i].line) + ": duplicate week for '" +
                                                 ticker + "'");
        if (gap != 7)
          throw Error(ErrorKind::validation, detail::row_tag(rows[i].line) +
                                                 ": weeks of '" + ticker + "' are not weekly");
      }
      s.weeks.push_back(rows[i].week);
      s.volume.push_back(rows[i].volume);
    }
    out.push_back(std::move(s));
  }
  if (opts.align) out = align_search_series(std::move(out));
  for (const auto& s : out)
    if (s.size() < opts.min_weeks)
      throw Error(ErrorKind::validation, "search series '" + s.ticker + "' has " +
                                             std::to_string(s.size()) + " weeks, need " +
                                             std::to_string(opts.min_weeks));
  return out;
}

inline std::vector<SearchSeries> load_search_series(const std::filesystem::path& path,
                                                    SearchOptions opts = {}) {
  auto in = csv::open(path);
  return read_search_series(in, opts);
}

inline void write_search_series(std::ostream& out, const std::vector<SearchSeries>& series) {
  out << "week_start,ticker,volume\n";
  for (const auto& s : series)
    for (std::size_t w = 0; w < s.size(); ++w)
      out << format_date(s.weeks[w]) << ',' << s.ticker << ',' << csv::format_double(s.volume[w])
          << '\n';
}

// ---------------------------------------------------------------------------
// Generic numeric table (first column a label), used for simulator output.

struct NumericTable {
  std::vector<std::string> names;  // numeric column names
  std::vector<std::string> labels;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorKind::validation, "no column '" + name + "'");
    return columns[static_cast<std::size_t>(it - names.begin())];
  }
};

inline NumericTable read_numeric_table(std::istream& in) {
  const csv::Table t = csv::read(in);
  if (t.header.size() < 2) throw Error(ErrorKind::parse, "table needs a label and a value column");
  NumericTable out;
  out.names.assign(t.header.begin() + 1, t.header.end());
  out.columns.assign(out.names.size(), {});
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    out.labels.push_back(t.rows[i][0]);
    for (std::size_t c = 0; c < out.names.size(); ++c)
      out.columns[c].push_back(detail::number_field(t.rows[i][c + 1], t.line_numbers[i], "value"));
  }
  return out;
}

inline NumericTable load_numeric_table(const std::filesystem::path& path) {
  auto in = csv::open(path);
  return read_numeric_table(in);
}

}  // namespace abm::ingest
