#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "abm/ingest.hpp"
#include "test_util.hpp"

using namespace abm;
using namespace abm::ingest;
using testutil::TempDir;

namespace {

template <class Fn>
std::string error_message(ErrorKind expected, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), expected) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "no error thrown";
  return {};
}

IndexSeries parse_index(const std::string& text) {
  std::istringstream in(text);
  return read_index_series(in);
}

ReturnsPanel parse_panel(const std::string& panel, const std::string& sectors, PanelOptions o = {}) {
  std::istringstream p(panel), s(sectors);
  return read_returns_panel(p, s, o);
}

std::string weekly_csv(const std::string& ticker, Date start, int weeks, double base) {
  std::ostringstream out;
  for (int w = 0; w < weeks; ++w)
    out << format_date(testutil::day_offset(start, 7 * w)) << ',' << ticker << ',' << base + w % 5
        << '\n';
  return out.str();
}

}  // namespace

TEST(IndexSeries, ThreeRowFileLoads) {
  const auto s = parse_index("date,close,volume\n2020-01-01,100,10\n2020-01-02,110,12\n2020-01-03,99,8\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.close, (std::vector<double>{100, 110, 99}));
  EXPECT_EQ(s.volume, (std::vector<double>{10, 12, 8}));
}

TEST(IndexSeries, ZeroCloseNamesTheRow) {
  const auto msg = error_message(ErrorKind::validation, [] {
    parse_index("date,close,volume\n2020-01-01,100,10\n2020-01-02,0,12\n2020-01-03,99,8\n");
  });
  EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
}

TEST(IndexSeries, MalformedRowGivesParseErrorWithRow) {
  const auto msg = error_message(ErrorKind::parse, [] {
    parse_index("date,close,volume\n2020-01-01,100,10\n2020-01-02,abc,12\n");
  });
  EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
  const auto ragged = error_message(ErrorKind::parse, [] {
    parse_index("date,close,volume\n2020-01-01,100\n");
  });
  EXPECT_NE(ragged.find("row 2"), std::string::npos) << ragged;
}

TEST(IndexSeries, DuplicateDateRejected) {
  error_message(ErrorKind::validation, [] {
    parse_index("date,close\n2020-01-01,100\n2020-01-01,101\n");
  });
}

TEST(IndexSeries, UnsortedRowsAreSorted) {
  const auto s = parse_index("date,close\n2020-01-03,3\n2020-01-01,1\n2020-01-02,2\n");
  EXPECT_EQ(s.close, (std::vector<double>{1, 2, 3}));
  EXPECT_TRUE(s.volume.empty());
}

TEST(IndexSeries, LargeFixtureMatchesLineCount) {
  TempDir dir("ingest");
  std::mt19937_64 gen(5);
  std::normal_distribution<double> step(0.0, 0.01);
  std::ostringstream out;
  out << "date,close,volume\n";
  double price = 100.0;
  const Date start = testutil::ymd(2000, 1, 3);
  for (int i = 0; i < 5000; ++i) {
    price *= std::exp(step(gen));
    out << format_date(testutil::day_offset(start, i)) << ',' << csv::format_double(price) << ','
        << 1000 + i % 17 << '\n';
  }
  testutil::write_file(dir / "index.csv", out.str());
  const auto s = load_index_series(dir / "index.csv");
  const std::size_t data_lines = testutil::count_lines(testutil::read_file(dir / "index.csv")) - 1;
  EXPECT_EQ(s.size(), data_lines);
  EXPECT_EQ(s.size(), 5000u);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(s.dates[i - 1], s.dates[i]);
}

TEST(IndexSeries, MissingFileNamesPath) {
  const auto msg = error_message(ErrorKind::validation, [] { load_index_series("/nonexistent/idx.csv"); });
  EXPECT_NE(msg.find("/nonexistent/idx.csv"), std::string::npos);
}

TEST(LogReturns, HandValues) {
  const double e = std::numbers::e;
  IndexSeries s;
  s.dates = {testutil::ymd(2020, 1, 1), testutil::ymd(2020, 1, 2), testutil::ymd(2020, 1, 3)};
  s.close = {1.0, e, e};
  auto r = log_returns(s);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r.returns[0], 1.0, 1e-15);
  EXPECT_EQ(r.returns[1], 0.0);

  s.close = {100, 110, 99};
  r = log_returns(s);
  EXPECT_NEAR(r.returns[0], std::log(1.1), 1e-15);
  EXPECT_NEAR(r.returns[1], std::log(0.9), 1e-15);
}

TEST(LogReturns, ConstantPricesGiveZeros) {
  IndexSeries s;
  for (int i = 0; i < 4; ++i) s.dates.push_back(testutil::day_offset(testutil::ymd(2020, 1, 1), i));
  s.close = {5, 5, 5, 5};
  s.volume = {1, 2, 3, 4};
  const auto r = log_returns(s);
  EXPECT_EQ(r.returns, (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(r.volume, (std::vector<double>{2, 3, 4}));  // volume of day t
}

TEST(LogReturns, CumulativeSumRecoversPrices) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  IndexSeries s;
  for (int i = 0; i < 2000; ++i) {
    s.dates.push_back(testutil::day_offset(testutil::ymd(2001, 1, 1), i));
    s.close.push_back(50.0 * u(gen));
  }
  const auto r = log_returns(s);
  double acc = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    acc += r.returns[t];
    const double rebuilt = s.close[0] * std::exp(acc);
    EXPECT_NEAR(rebuilt / s.close[t + 1], 1.0, 1e-12);
  }
}

TEST(IndexSeries, RoundTrip) {
  const auto s = parse_index("date,close,volume\n2020-01-01,100.25,10\n2020-01-02,0.1,12.5\n2020-01-06,1e-7,0\n");
  std::ostringstream out;
  write_index_series(out, s);
  EXPECT_EQ(parse_index(out.str()), s);
}

TEST(ReturnsPanel, SmallPanelLoads) {
  const auto p = parse_panel("date,AAA,BBB\nd1,0.1,0.2\nd2,-0.1,0.0\nd3,0.3,-0.2\n",
                             "ticker,sector_id\nAAA,1\nBBB,2\n");
  EXPECT_EQ(p.rows(), 3u);
  EXPECT_EQ(p.cols(), 2u);
  EXPECT_EQ(p.column("BBB"), (std::vector<double>{0.2, 0.0, -0.2}));
}

TEST(ReturnsPanel, TickerWithoutSectorIsNamed) {
  const auto msg = error_message(ErrorKind::validation, [] {
    parse_panel("date,AAA,XYZ\nd1,0.1,0.2\nd2,0.1,0.2\n", "ticker,sector_id\nAAA,1\n");
  });
  EXPECT_NE(msg.find("XYZ"), std::string::npos);
}

TEST(ReturnsPanel, RaggedRowIsParseError) {
  error_message(ErrorKind::parse, [] {
    parse_panel("date,AAA,BBB\nd1,0.1,0.2\nd2,0.1\n", "ticker,sector_id\nAAA,1\nBBB,1\n");
  });
}

TEST(ReturnsPanel, LargeFixtureHasAllColumnsAndSectors) {
  std::ostringstream panel, sectors;
  sectors << "ticker,sector_id\n";
  panel << "date";
  for (int k = 0; k < 108; ++k) {
    panel << ",T" << k;
    sectors << 'T' << k << ',' << "sec" << k % 5 << '\n';
  }
  panel << '\n';
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 60; ++t) {
    panel << "day" << t;
    for (int k = 0; k < 108; ++k) panel << ',' << csv::format_double(n01(gen));
    panel << '\n';
  }
  const auto p = parse_panel(panel.str(), sectors.str());
  EXPECT_EQ(p.cols(), 108u);
  EXPECT_EQ(p.sector_ids().size(), 5u);
}

TEST(ReturnsPanel, MissingCellsRejectedUnlessForwardFilled) {
  const std::string panel = "date,AAA,BBB\nd1,0.1,0.2\nd2,,0.2\nd3,NA,0.1\nd4,0.2,0.3\n";
  const std::string sectors = "ticker,sector_id\nAAA,1\nBBB,1\n";
  error_message(ErrorKind::validation, [&] { parse_panel(panel, sectors); });
  const auto p = parse_panel(panel, sectors, {true});
  EXPECT_EQ(p.column("AAA"), (std::vector<double>{0.1, 0.0, 0.0, 0.2}));
  const std::string long_gap = "date,AAA\nd1,0.1\nd2,\nd3,\nd4,\nd5,0.2\n";
  error_message(ErrorKind::validation, [&] { parse_panel(long_gap, "ticker,sector_id\nAAA,1\n", {true}); });
}

TEST(ReturnsPanel, RoundTripAndPermutation) {
  const std::string sectors = "ticker,sector_id\nAAA,1\nBBB,2\nCCC,1\n";
  const auto p = parse_panel("date,AAA,BBB,CCC\nd1,0.1,0.2,0.3\nd2,-0.1,0.5,1e-9\n", sectors);
  std::ostringstream out, map;
  write_returns_panel(out, p);
  write_sector_map(map, p.tickers, p.sector_of);
  EXPECT_EQ(parse_panel(out.str(), map.str()), p);

  const auto permuted = parse_panel("date,CCC,AAA,BBB\nd1,0.3,0.1,0.2\nd2,1e-9,-0.1,0.5\n", sectors);
  EXPECT_FALSE(permuted == p);
  EXPECT_TRUE(same_content(permuted, p));
  const auto changed = parse_panel("date,CCC,AAA,BBB\nd1,0.3,0.1,0.2\nd2,1e-9,-0.1,0.6\n", sectors);
  EXPECT_FALSE(same_content(changed, p));
}

TEST(SearchSeries, SingleTicker) {
  std::istringstream in("week_start,ticker,volume\n" + weekly_csv("AAA", testutil::ymd(2010, 1, 3), 104, 10));
  const auto s = read_search_series(in);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].size(), 104u);
}

TEST(SearchSeries, NegativeVolumeRejected) {
  std::string text = "week_start,ticker,volume\n" + weekly_csv("AAA", testutil::ymd(2010, 1, 3), 60, 10);
  const std::string week7 = format_date(testutil::day_offset(testutil::ymd(2010, 1, 3), 42));
  const auto pos = text.find(week7 + ",AAA,");
  ASSERT_NE(pos, std::string::npos);
  const auto eol = text.find('\n', pos);
  text.replace(pos, eol - pos, week7 + ",AAA,-3");
  std::istringstream in(text);
  error_message(ErrorKind::validation, [&] { read_search_series(in); });
}

TEST(SearchSeries, OffsetTickersAlignToIntersection) {
  const Date a0 = testutil::ymd(2010, 1, 3);
  const Date b0 = testutil::day_offset(a0, 7 * 10);
  std::istringstream in("week_start,ticker,volume\n" + weekly_csv("AAA", a0, 80, 1) +
                        weekly_csv("BBB", b0, 80, 2));
  const auto s = read_search_series(in);
  ASSERT_EQ(s.size(), 2u);
  // Oracle: set intersection of the week labels.
  std::set<Date> wa, wb;
  for (int w = 0; w < 80; ++w) {
    wa.insert(testutil::day_offset(a0, 7 * w));
    wb.insert(testutil::day_offset(b0, 7 * w));
  }
  std::vector<Date> common;
  std::set_intersection(wa.begin(), wa.end(), wb.begin(), wb.end(), std::back_inserter(common));
  EXPECT_EQ(s[0].weeks, common);
  EXPECT_EQ(s[1].weeks, common);
  EXPECT_EQ(s[0].volume.front(), 1 + 10 % 5);
}

TEST(SearchSeries, NonWeeklyCadenceRejected) {
  std::istringstream in("week_start,ticker,volume\n2010-01-03,A,1\n2010-01-11,A,2\n");
  error_message(ErrorKind::validation, [&] { read_search_series(in, {true, 2}); });
}

TEST(SearchSeries, RoundTrip) {
  std::istringstream in("week_start,ticker,volume\n" + weekly_csv("AAA", testutil::ymd(2012, 5, 6), 60, 3.5) +
                        weekly_csv("BBB", testutil::ymd(2012, 5, 6), 60, 7));
  const auto s = read_search_series(in);
  std::ostringstream out;
  write_search_series(out, s);
  std::istringstream back(out.str());
  EXPECT_EQ(read_search_series(back), s);
}

TEST(Csv, FormatDoubleRoundTrips) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(gen) * std::pow(10.0, i % 20 - 10);
    double back;
    ASSERT_TRUE(csv::parse_double(csv::format_double(v), back));
    EXPECT_EQ(back, v);
  }
}
