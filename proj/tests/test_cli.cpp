#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include <json.hpp>

#include "abm/ingest.hpp"
#include "test_util.hpp"

using namespace testutil;
using json = nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Result abmsim(const TempDir& dir, const std::vector<std::string>& args) {
  std::string cmd = "cd " + quote(dir.path().string()) + " && SOURCE_DATE_EPOCH=0 " + quote(ABMSIM_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " > cli.log 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = read_file(dir / "cli.log");
  return r;
}

std::string date_str(int day) { return abm::ingest::format_date(day_offset(ymd(2001, 1, 1), day)); }

// Daily index with volume; volume is higher after up days.
void write_index(const fs::path& p, std::size_t days, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  std::ostringstream s;
  s << "date,close,volume\n";
  double close = 1000, last = 0;
  for (std::size_t t = 0; t < days; ++t) {
    const double vol = 1e6 * (1.0 + 0.2 * (last > 0) + 0.1 * std::fabs(z(gen)));
    last = 0.01 * z(gen);
    close *= std::exp(last);
    s << date_str(static_cast<int>(t)) << ',' << abm::ingest::csv::format_double(close) << ','
      << abm::ingest::csv::format_double(vol) << '\n';
  }
  write_file(p, s.str());
}

// Ten stocks in two sectors: a market factor plus a sector factor.
void write_panel(const TempDir& dir, std::size_t days) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> z;
  std::ostringstream s, sec;
  s << "date";
  sec << "ticker,sector_id\n";
  for (int k = 0; k < 10; ++k) {
    s << ",T" << k;
    sec << 'T' << k << ',' << (k < 5 ? "fin" : "tech") << '\n';
  }
  s << '\n';
  for (std::size_t t = 0; t < days; ++t) {
    const double m = z(gen), f1 = z(gen), f2 = z(gen);
    s << date_str(static_cast<int>(t));
    for (int k = 0; k < 10; ++k)
      s << ',' << abm::ingest::csv::format_double(0.5 * m + 0.6 * (k < 5 ? f1 : f2) + 0.5 * z(gen));
    s << '\n';
  }
  write_file(dir / "panel.csv", s.str());
  write_file(dir / "sectors.csv", sec.str());
}

// Weekly search volumes, trading volumes and a weekly market index.
void write_weekly(const TempDir& dir, std::size_t weeks) {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> z;
  std::ostringstream search, volumes, market;
  search << "week_start,ticker,volume\n";
  volumes << "week_start,ticker,volume\n";
  market << "date,close\n";
  double close = 100;
  for (std::size_t w = 0; w <= weeks; ++w) {
    const std::string d = date_str(static_cast<int>(7 * w));
    close *= std::exp(0.02 * z(gen));
    market << d << ',' << abm::ingest::csv::format_double(close) << '\n';
    for (const char* tk : {"AAA", "BBB", "CCC"}) {
      const double g = 50 + 10 * std::sin(0.2 * static_cast<double>(w)) + 5 * z(gen);
      search << d << ',' << tk << ',' << abm::ingest::csv::format_double(std::max(g, 0.0)) << '\n';
      volumes << d << ',' << tk << ',' << abm::ingest::csv::format_double(1e5 * (1 + 0.01 * g + 0.1 * std::fabs(z(gen))))
              << '\n';
    }
  }
  write_file(dir / "search.csv", search.str());
  write_file(dir / "volumes.csv", volumes.str());
  write_file(dir / "market.csv", market.str());
}

}  // namespace

TEST(Cli, SimulateIsReproducible) {
  TempDir dir("cli");
  const std::vector<std::string> base{"simulate", "--model", "a", "--seed", "5", "--t-max", "1150"};
  auto args = base;
  args.insert(args.end(), {"--out", "run1"});
  ASSERT_EQ(abmsim(dir, args).code, 0);
  args = base;
  args.insert(args.end(), {"--out", "run2"});
  ASSERT_EQ(abmsim(dir, args).code, 0);
  const auto r1 = read_file(dir / "run1/returns.csv");
  EXPECT_EQ(r1, read_file(dir / "run2/returns.csv"));
  EXPECT_EQ(count_lines(r1), 1000u + 1);  // t_max - warmup rows plus header
  auto man = json::parse(read_file(dir / "run1/manifest.json"));
  auto man2 = json::parse(read_file(dir / "run2/manifest.json"));
  man2["command_line"] = man["command_line"];  // differs only in --out
  EXPECT_EQ(man, man2);

  EXPECT_EQ(man["seed"], 5);
  EXPECT_EQ(man["config"]["t_max"], 1150);
  EXPECT_TRUE(man["outputs"].contains("returns.csv"));
  EXPECT_TRUE(man["outputs"].contains("diagnostics.csv"));
  EXPECT_EQ(man["timestamp"], "1970-01-01T00:00:00Z");
}

TEST(Cli, OutRootFromEnvironment) {
  TempDir dir("cli");
  const std::string cmd = "cd " + quote(dir.path().string()) + " && ABMSIM_OUT_ROOT=elsewhere " +
                          quote(ABMSIM_PATH) + " simulate --model d --t-max 400 > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "elsewhere/simulate-d/returns.csv"));
  EXPECT_NE(read_file(dir / "elsewhere/simulate-d/diagnostics.csv").find("F_mean"), std::string::npos);
}

TEST(Cli, MissingConfigNamesPath) {
  TempDir dir("cli");
  const auto r = abmsim(dir, {"simulate", "--model", "a", "--config", "no_such.json", "--out", "x"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("no_such.json"), std::string::npos) << r.output;
}

TEST(Cli, BadFlagIsUsageError) {
  TempDir dir("cli");
  EXPECT_EQ(abmsim(dir, {"simulate", "--model", "e"}).code, 2);
  EXPECT_EQ(abmsim(dir, {"frobnicate"}).code, 2);
}

TEST(Cli, SectorBelowMarketRejected) {
  TempDir dir("cli");
  write_file(dir / "c.json", R"({"H_M": 0.4, "H_j": [0.5, 0.45, 0.39, 0.6, 0.7], "t_max": 200})");
  const auto r = abmsim(dir, {"simulate", "--model", "c", "--config", "c.json", "--out", "x"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.output.find("sector 3"), std::string::npos) << r.output;
}

TEST(Cli, UnknownConfigFieldRejected) {
  TempDir dir("cli");
  write_file(dir / "a.json", R"({"alpah": 1.1})");
  const auto r = abmsim(dir, {"simulate", "--model", "a", "--config", "a.json", "--out", "x"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("alpah"), std::string::npos);
}

TEST(Cli, ModelCWritesPanelAndSpectrum) {
  TempDir dir("cli");
  write_file(dir / "c.json", R"({"preset": "hkse", "N": 4000, "t_max": 600})");
  ASSERT_EQ(abmsim(dir, {"simulate", "--model", "c", "--config", "c.json", "--out", "sim"}).code, 0);
  EXPECT_TRUE(fs::exists(dir / "sim/returns_panel.csv"));
  const auto r = abmsim(dir, {"analyze", "spectrum", "--panel", "sim/returns_panel.csv", "--sectors",
                              "sim/sectors.csv", "--out", "spec"});
  ASSERT_EQ(r.code, 0) << r.output;
  const auto ev = json::parse(read_file(dir / "spec/eigenvalues.json"));
  EXPECT_EQ(ev["eigenvalues"].size(), 50u);
  EXPECT_EQ(ev["modes"].size(), 3u);
  EXPECT_TRUE(ev.contains("marchenko_pastur"));
  EXPECT_EQ(count_lines(read_file(dir / "spec/eigenvectors.csv")), 51u);
}

TEST(Cli, AnalyzeStatsAndLcurve) {
  TempDir dir("cli");
  ASSERT_EQ(abmsim(dir, {"simulate", "--model", "a", "--t-max", "4150", "--out", "s1"}).code, 0);
  ASSERT_EQ(abmsim(dir, {"simulate", "--model", "a", "--t-max", "4150", "--seed", "2", "--out", "s2"}).code, 0);
  auto r = abmsim(dir, {"analyze", "stats", "--in", "s1/returns.csv", "--out", "st"});
  ASSERT_EQ(r.code, 0) << r.output;
  const auto st = json::parse(read_file(dir / "st/stats.json"));
  EXPECT_TRUE(st["hurst"].is_number());
  EXPECT_TRUE(st["tail_exponent"].is_number());
  EXPECT_EQ(st["days"], 4000);
  EXPECT_EQ(count_lines(read_file(dir / "st/acf.csv")), 51u);

  r = abmsim(dir, {"analyze", "stats", "--in", "s1/returns.csv", "--format", "csv", "--out", "stc"});
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(read_file(dir / "stc/stats.csv").find("hurst,"), std::string::npos);

  r = abmsim(dir, {"analyze", "lcurve", "--in", "s1/returns.csv", "--in", "s2/returns.csv",
                   "--max-lag", "40", "--out", "lc"});
  ASSERT_EQ(r.code, 0) << r.output;
  const auto lc = read_file(dir / "lc/lcurve.csv");
  EXPECT_EQ(count_lines(lc), 41u);
  EXPECT_EQ(lc.substr(0, lc.find('\n')), "lag,L,stderr");
  const auto lj = json::parse(read_file(dir / "lc/lcurve.json"));
  EXPECT_EQ(lj["ensemble_size"], 2);
  EXPECT_TRUE(lj["fit"].contains("tau") || lj["fit"].contains("error"));
}

TEST(Cli, StatsOnShortSeriesNamesEstimator) {
  TempDir dir("cli");
  ASSERT_EQ(abmsim(dir, {"simulate", "--model", "a", "--t-max", "450", "--out", "s"}).code, 0);
  const auto r = abmsim(dir, {"analyze", "stats", "--in", "s/returns.csv", "--out", "st"});
  EXPECT_EQ(r.code, 1);  // numeric, not an input error
  EXPECT_NE(r.output.find("hurst"), std::string::npos) << r.output;
}

TEST(Cli, CalibrateAsymmetryFeedsSimulate) {
  TempDir dir("cli");
  write_index(dir / "index.csv", 1500, 3);
  auto r = abmsim(dir, {"calibrate", "asymmetry", "--index", "index.csv", "--out", "cal"});
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rep = json::parse(read_file(dir / "cal/report.json"));
  EXPECT_NEAR(rep["alpha"].get<double>() + rep["beta"].get<double>(), 2.0, 1e-12);
  EXPECT_TRUE(rep["delta_R"].is_number_integer());
  EXPECT_TRUE(fs::exists(dir / "cal/report.txt"));
  const auto man = json::parse(read_file(dir / "cal/manifest.json"));
  EXPECT_TRUE(man["inputs"].contains("index.csv"));

  r = abmsim(dir, {"simulate", "--model", "a", "--config", "cal/report.json", "--t-max", "400", "--out", "s"});
  ASSERT_EQ(r.code, 0) << r.output;
  const auto sm = json::parse(read_file(dir / "s/manifest.json"));
  EXPECT_EQ(sm["config"]["alpha"], rep["alpha"]);
  EXPECT_EQ(sm["config"]["delta_R"], rep["delta_R"]);
}

TEST(Cli, CalibrateComovement) {
  TempDir dir("cli");
  write_panel(dir, 300);
  const auto r = abmsim(dir, {"calibrate", "comovement", "--panel", "panel.csv", "--sectors", "sectors.csv",
                              "--out", "co"});
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rep = json::parse(read_file(dir / "co/report.json"));
  ASSERT_EQ(rep["H_j"].size(), 2u);
  for (const auto& h : rep["H_j"]) EXPECT_GT(h.get<double>(), rep["H_M"].get<double>());
  EXPECT_EQ(rep["calibration"]["sector_ids"], json::array({"fin", "tech"}));
}

TEST(Cli, CalibrateInfoforce) {
  TempDir dir("cli");
  write_weekly(dir, 80);
  auto r = abmsim(dir, {"calibrate", "infoforce", "--search", "search.csv", "--volumes", "volumes.csv",
                        "--market", "market.csv", "--tau", "8", "--out", "inf"});
  ASSERT_EQ(r.code, 0) << r.output;
  const auto rep = json::parse(read_file(dir / "inf/report.json"));
  EXPECT_EQ(rep["tau"], 8);
  EXPECT_EQ(rep["calibration"]["tau_source"], "given");
  EXPECT_NEAR(rep["a"].get<double>(), rep["delta_F"].get<double>() / 2, 1e-15);
  EXPECT_GT(count_lines(read_file(dir / "inf/forces.csv")), 1u);

  r = abmsim(dir, {"calibrate", "infoforce", "--search", "search.csv", "--volumes", "volumes.csv",
                   "--market", "market.csv", "--out", "inf2"});
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(json::parse(read_file(dir / "inf2/report.json"))["calibration"]["tau_source"], "default");
}

TEST(Cli, EnsembleIndependentOfJobs) {
  TempDir dir("cli");
  for (const char* jobs : {"1", "3"}) {
    const auto r = abmsim(dir, {"simulate", "--model", "b", "--t-max", "600", "--ensemble", "4", "--jobs", jobs,
                                "--out", std::string("e") + jobs});
    ASSERT_EQ(r.code, 0) << r.output;
  }
  const auto e1 = read_file(dir / "e1/ensemble.csv");
  EXPECT_EQ(e1, read_file(dir / "e3/ensemble.csv"));
  EXPECT_EQ(count_lines(e1), 5u);
  EXPECT_TRUE(fs::exists(dir / "e1/seed_4/returns.csv"));
  EXPECT_EQ(json::parse(read_file(dir / "e1/seed_3/manifest.json"))["seed"], 3);
}

TEST(Cli, Pipeline) {
  TempDir dir("cli");
  write_file(dir / "pipe.json", R"({
  "vars": {"out": "p"},
  "steps": [
    ["simulate", "--model", "d", "--t-max", "2250", "--out", "${out}/sim"],
    ["analyze", "lcurve", "--in", "${out}/sim/returns.csv", "--max-lag", "20", "--out", "${out}/lc"]
  ]
})");
  auto r = abmsim(dir, {"pipeline", "pipe.json"});
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(count_lines(read_file(dir / "p/lc/lcurve.csv")), 21u);

  write_file(dir / "bad.json", R"({"steps": [["simulate", "--model", "a", "--config", "gone.json"]]})");
  r = abmsim(dir, {"pipeline", "bad.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("step 1"), std::string::npos);
}

TEST(Cli, SampleConfigsLoad) {
  TempDir dir("cli");
  const fs::path samples = fs::path(ABM_SOURCE_DIR) / "sample_configs";
  const std::vector<std::pair<std::string, std::string>> files{
      {"model_a_sp500.json", "a"}, {"model_a_shanghai.json", "a"}, {"model_b.json", "b"},
      {"model_c_nyse.json", "c"},  {"model_c_hkse.json", "c"},     {"model_d.json", "d"}};
  for (const auto& [file, model] : files) {
    const auto r = abmsim(dir, {"simulate", "--model", model, "--config", (samples / file).string(),
                                "--t-max", "300", "--out", file});
    EXPECT_EQ(r.code, 0) << file << ": " << r.output;
  }
}
