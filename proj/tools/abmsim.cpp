// abmsim: calibrate, simulate and analyze the agent-based market models.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "abm/abm.hpp"
#include "abm/io/config_json.hpp"
#include "abm/io/digest.hpp"
#include "abm/io/sim_files.hpp"
#include "abm/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kOutRootEnv = "ABMSIM_OUT_ROOT";

constexpr const char* kFormatsHelp = R"(Input files are headered CSV with ISO-8601 dates:
  index.csv    date,close[,volume]          daily prices, volume optional
  panel.csv    date,TICKER1,...,TICKERn     returns, one column per stock
  sectors.csv  ticker,sector_id
  search.csv   week_start,ticker,volume     weekly, also used for weekly trading volumes
Config files are flat JSON objects (N, M, p, k, alpha, delta_R, c, n, n_sec,
H_M, H_j, P_group, tau, a, f, b1, initial_state, seed, t_max, warmup, preset).
Calibration reports load directly as configs.

Exit codes: 0 success, 1 numeric failure, 2 input or validation failure.
Default output root: $ABMSIM_OUT_ROOT, else ./abmsim-out.
SOURCE_DATE_EPOCH, when set, fixes the manifest timestamp.)";

// ---------------------------------------------------------------------------
// Output plumbing

fs::path default_out(const std::string& name) {
  const char* root = std::getenv(kOutRootEnv);
  return fs::path(root && *root ? root : "abmsim-out") / name;
}

fs::path resolve_out(const std::string& given, const std::string& name) {
  return given.empty() ? default_out(name) : fs::path(given);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw abm::Error(abm::ErrorKind::validation, "cannot write '" + path.string() + "'");
  out << text;
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  write_text(path, ss.str());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
    now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Manifest {
  std::string command;
  std::string command_line;
  std::vector<std::string> inputs;
  std::optional<json> config;
  std::optional<std::uint64_t> seed;
  json extra = json::object();
};

// One manifest per output directory; output digests cover every other file
// in the directory (subdirectories carry their own manifests).
void write_manifest(const fs::path& dir, const Manifest& m) {
  json j;
  j["tool"] = "abmsim";
  j["version"] = abm::kVersion;
  j["command"] = m.command;
  j["command_line"] = m.command_line;
  j["timestamp"] = timestamp_utc();
  if (m.seed) j["seed"] = *m.seed;
  if (m.config) {
    json hashed = *m.config;
    hashed.erase("seed");
    j["config"] = *m.config;
    j["config_hash"] = abm::io::sha256(hashed.dump());
  }
  json inputs = json::object();
  for (const auto& p : m.inputs) inputs[p] = abm::io::sha256_file(p);
  j["inputs"] = inputs;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  json outputs = json::object();
  for (const auto& f : files) outputs[f.filename().string()] = abm::io::sha256_file(f);
  j["outputs"] = outputs;
  for (const auto& [k, v] : m.extra.items()) j[k] = v;
  write_json(dir / "manifest.json", j);
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s = "abmsim";
  for (const auto& a : args) s += " " + a;
  return s;
}

// Prefixes an estimator name onto numeric failures so the user can tell
// which diagnostic broke.
template <class Fn>
auto estimator(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const abm::Error& e) {
    throw abm::Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

json curve_json(const abm::stats::CorrelationCurve& c) {
  return json{{"estimator", abm::stats::to_string(c.estimator_id)}, {"lags", c.lags}, {"values", c.values}};
}

json fit_json(const abm::stats::FitResult& f) {
  json j{{"model", abm::stats::to_string(f.model)}, {"residual_rms", f.residual_rms}};
  switch (f.model) {
    case abm::stats::FitModel::exponential: j["c"] = f.amplitude; j["tau"] = f.tau; break;
    case abm::stats::FitModel::power_law: j["amplitude"] = f.amplitude; j["exponent"] = f.exponent; break;
    case abm::stats::FitModel::linear_through_origin: j["slope"] = f.slope; break;
  }
  return j;
}

void write_curve_csv(std::ostream& out, const char* name, const std::vector<int>& lags,
                     const std::vector<double>& values, const std::vector<double>* stderr_ = nullptr) {
  using abm::ingest::csv::format_double;
  out << "lag," << name << (stderr_ ? ",stderr" : "") << '\n';
  for (std::size_t i = 0; i < lags.size(); ++i) {
    out << lags[i] << ',' << format_double(values[i]);
    if (stderr_) out << ',' << format_double((*stderr_)[i]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOpts {
  std::string index, panel, sectors, search, volumes, market, out;
  double k = abm::sim::default_return_scale(abm::sim::ModelKind::a);
  std::size_t M = 150;
  std::string shift_fit = "affine";
  bool forward_fill = false;
  int tau = 0;
};

std::string table_text(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t w = 0;
  for (const auto& r : rows) w = std::max(w, r.first.size());
  std::ostringstream ss;
  for (const auto& r : rows) ss << std::left << std::setw(static_cast<int>(w) + 2) << r.first << r.second << '\n';
  return ss.str();
}

std::string num(double v) { return abm::ingest::csv::format_double(v); }

void cmd_calibrate_asymmetry(const CalibrateOpts& o, Manifest& m) {
  using namespace abm;
  const auto index = ingest::load_index_series(o.index);
  const auto series = ingest::log_returns(index);
  if (!series.has_volume()) throw Error(ErrorKind::validation, o.index + ": no volume column");
  const auto weights = sim::horizon_weights(o.M);
  auto est = calibrate::trading_asymmetry(series, weights, o.k);
  const auto r = stats::normalize(series.returns);
  est.delta_r = calibrate::herding_shift(r.values, series.volume);
  const auto mode = o.shift_fit == "origin" ? calibrate::ShiftFit::through_origin : calibrate::ShiftFit::affine;
  const auto map = calibrate::fit_shift_map(calibrate::kShiftTable, mode);
  est.delta_R = map.apply(est.delta_r);

  const fs::path dir = resolve_out(o.out, "calibrate-asymmetry");
  fs::create_directories(dir);
  json rep{{"alpha", est.alpha}, {"beta", est.beta}, {"delta_r", est.delta_r},
           {"delta_R", est.delta_R}, {"volume_ratio", est.volume_ratio}, {"k", o.k}, {"M", o.M},
           {"calibration", {{"kind", "asymmetry"}, {"bull_days", est.bull_days},
                            {"bear_days", est.bear_days}, {"shift_fit", o.shift_fit},
                            {"shift_slope", map.slope}, {"shift_intercept", map.intercept}}}};
  write_json(dir / "report.json", rep);
  write_text(dir / "report.txt", table_text({{"alpha", num(est.alpha)}, {"beta", num(est.beta)},
                                             {"V+/V-", num(est.volume_ratio)},
                                             {"delta_r", num(est.delta_r)},
                                             {"delta_R", std::to_string(est.delta_R)},
                                             {"bull days", std::to_string(est.bull_days)},
                                             {"bear days", std::to_string(est.bear_days)},
                                             {"k", num(o.k)}, {"M", std::to_string(o.M)}}));
  m.inputs = {o.index};
  std::cout << "alpha " << num(est.alpha) << "  delta_r " << num(est.delta_r) << "  delta_R "
            << est.delta_R << "  -> " << dir.string() << '\n';
  write_manifest(dir, m);
}

void cmd_calibrate_comovement(const CalibrateOpts& o, Manifest& m) {
  using namespace abm;
  const auto panel = ingest::load_returns_panel(o.panel, o.sectors, {o.forward_fill});
  const auto est = calibrate::comovement(panel);
  const fs::path dir = resolve_out(o.out, "calibrate-comovement");
  fs::create_directories(dir);
  json rep{{"H_M", est.H_M}, {"H_j", est.H_j}, {"n_sec", est.sector_ids.size()},
           {"n", panel.cols()},
           {"calibration", {{"kind", "comovement"}, {"sector_ids", est.sector_ids},
                            {"days", panel.rows()}}}};
  write_json(dir / "report.json", rep);
  std::vector<std::pair<std::string, std::string>> rows{{"H_M", num(est.H_M)}};
  for (std::size_t j = 0; j < est.sector_ids.size(); ++j)
    rows.emplace_back("H_" + est.sector_ids[j], num(est.H_j[j]));
  write_text(dir / "report.txt", table_text(rows));
  m.inputs = {o.panel, o.sectors};
  std::cout << "H_M " << num(est.H_M) << " over " << est.sector_ids.size() << " sectors -> "
            << dir.string() << '\n';
  write_manifest(dir, m);
}

void cmd_calibrate_infoforce(const CalibrateOpts& o, Manifest& m) {
  using namespace abm;
  ingest::SearchOptions sopts;
  auto search = ingest::load_search_series(o.search, sopts);
  auto volumes = ingest::load_search_series(o.volumes, sopts);
  const auto market_index = ingest::load_index_series(o.market);
  const auto market = ingest::log_returns(market_index);

  // Common weekly clock: search weeks, trading-volume weeks and market returns.
  std::map<std::string, const ingest::SearchSeries*> vol_of;
  for (const auto& v : volumes) vol_of[v.ticker] = &v;
  std::set<ingest::Date> weeks(market.dates.begin(), market.dates.end());
  for (const auto& s : search) {
    const auto it = vol_of.find(s.ticker);
    if (it == vol_of.end())
      throw Error(ErrorKind::validation, "ticker '" + s.ticker + "' has no trading volumes");
    std::set<ingest::Date> keep;
    for (const auto& w : s.weeks)
      if (weeks.count(w) &&
          std::binary_search(it->second->weeks.begin(), it->second->weeks.end(), w))
        keep.insert(w);
    weeks = std::move(keep);
  }
  if (weeks.size() < 2 * ingest::kDefaultTauWeeks)
    throw Error(ErrorKind::insufficient_data, "fewer than 52 common weeks across inputs");
  auto pick = [&](const std::vector<ingest::Date>& dates, const std::vector<double>& values) {
    std::vector<double> out;
    for (std::size_t i = 0; i < dates.size(); ++i)
      if (weeks.count(dates[i])) out.push_back(values[i]);
    return out;
  };
  const std::vector<double> market_r = pick(market.dates, market.returns);

  // Correlating time from the ticker-averaged autocorrelation of G.
  int tau = o.tau;
  bool deviated = false;
  std::string tau_source = "given";
  std::vector<std::vector<double>> g_of;
  for (const auto& s : search) g_of.push_back(pick(s.weeks, s.volume));
  if (tau <= 0) {
    constexpr int kLags = 30;
    if (weeks.size() > 4 * kLags) {
      std::vector<stats::CorrelationCurve> curves;
      for (const auto& g : g_of)
        curves.push_back(estimator("A", [&] { return stats::autocorrelation_abs(g, kLags); }));
      const stats::CorrelationCurve c = stats::ensemble_mean(curves).mean;
      const auto ct = estimator("correlating_time", [&] { return calibrate::correlating_time(c); });
      tau = ct.tau;
      deviated = ct.deviated;
      tau_source = "estimated";
    } else {
      tau = static_cast<int>(ingest::kDefaultTauWeeks);
      tau_source = "default";
    }
  }

  const fs::path dir = resolve_out(o.out, "calibrate-infoforce");
  fs::create_directories(dir);
  std::vector<calibrate::InfoForceSeries> forces;
  for (std::size_t i = 0; i < search.size(); ++i) {
    const auto& s = search[i];
    const auto states = calibrate::info_states(g_of[i]);
    const auto v = pick(vol_of.at(s.ticker)->weeks, vol_of.at(s.ticker)->volume);
    forces.push_back(calibrate::info_driving_force(states, v, static_cast<std::size_t>(tau), s.ticker));
  }
  const auto asym = estimator("delta_F", [&] { return calibrate::info_force_asymmetry(forces, market_r); });

  write_with(dir / "forces.csv", [&](std::ostream& out) {
    out << "ticker,window_start,F\n";
    const std::vector<ingest::Date> wk(weeks.begin(), weeks.end());
    for (const auto& f : forces)
      for (std::size_t w = 0; w < f.forces.size(); ++w)
        out << f.ticker << ',' << ingest::format_date(wk[f.window_starts[w]]) << ','
            << num(f.forces[w]) << '\n';
  });
  std::size_t skipped = 0;
  for (const auto& f : forces) skipped += f.skipped_zero_baseline;
  json rep{{"tau", tau}, {"tau_deviated", deviated}, {"delta_F", asym.delta_F},
           {"a", asym.asymmetry_coefficient()},
           {"calibration", {{"kind", "infoforce"}, {"tau_source", tau_source},
                            {"weeks", weeks.size()}, {"tickers", search.size()},
                            {"F_bull", asym.bull_mean}, {"F_bear", asym.bear_mean},
                            {"F_mean", asym.overall_mean}, {"bull_windows", asym.bull_windows},
                            {"bear_windows", asym.bear_windows},
                            {"skipped_zero_baseline", skipped}}}};
  write_json(dir / "report.json", rep);
  write_text(dir / "report.txt",
             table_text({{"tau (weeks)", std::to_string(tau) + " (" + tau_source + ")"},
                         {"F_bull", num(asym.bull_mean)}, {"F_bear", num(asym.bear_mean)},
                         {"<F>", num(asym.overall_mean)}, {"delta_F", num(asym.delta_F)},
                         {"a", num(asym.asymmetry_coefficient())}}));
  m.inputs = {o.search, o.volumes, o.market};
  std::cout << "tau " << tau << "  delta_F " << num(asym.delta_F) << " -> " << dir.string() << '\n';
  write_manifest(dir, m);
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
  std::string model = "a", config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> t_max;
  std::size_t ensemble = 0;
  std::size_t jobs = 1;
};

void write_run(const fs::path& dir, const abm::sim::SimOutput& s) {
  fs::create_directories(dir);
  write_with(dir / "returns.csv", [&](std::ostream& o) { abm::io::write_returns(o, s); });
  write_with(dir / "diagnostics.csv", [&](std::ostream& o) { abm::io::write_diagnostics(o, s); });
  if (!s.stock_returns.empty()) {
    const auto panel = abm::io::to_panel(s);
    write_with(dir / "returns_panel.csv",
               [&](std::ostream& o) { abm::ingest::write_returns_panel(o, panel, "day"); });
    write_with(dir / "sectors.csv",
               [&](std::ostream& o) { abm::ingest::write_sector_map(o, panel.tickers, panel.sector_of); });
  }
}

void cmd_simulate(const SimulateOpts& o, Manifest& m) {
  using namespace abm;
  const auto model = sim::parse_model_kind(o.model);
  sim::ModelConfig cfg = o.config.empty() ? sim::default_config(model)
                                          : io::load_config(o.config, model);
  if (o.seed) cfg.seed = *o.seed;
  if (o.t_max) cfg.t_max = *o.t_max;
  sim::validate(cfg, model);
  if (!o.config.empty()) m.inputs = {o.config};

  const fs::path dir = resolve_out(o.out, std::string("simulate-") + sim::to_string(model));
  fs::create_directories(dir);
  m.extra["model"] = sim::to_string(model);

  if (o.ensemble == 0) {
    const auto out = sim::run_model(cfg, model);
    write_run(dir, out);
    m.config = io::to_json(cfg);
    m.seed = cfg.seed;
    write_manifest(dir, m);
    std::cout << "model " << sim::to_string(model) << " seed " << cfg.seed << ": " << out.days()
              << " days -> " << dir.string() << '\n';
    return;
  }

  const auto seeds = sim::ensemble_seeds(cfg.seed, o.ensemble);
  const auto runs = sim::run_ensemble(cfg, model, seeds, o.jobs);
  std::ostringstream summary;
  summary << "seed,days,var_R,excess_kurtosis,returns_sha256\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path sub = dir / ("seed_" + std::to_string(seeds[i]));
    write_run(sub, runs[i]);
    Manifest sm = m;
    sm.config = io::to_json(cfg);
    (*sm.config)["seed"] = seeds[i];
    sm.seed = seeds[i];
    write_manifest(sub, sm);
    summary << seeds[i] << ',' << runs[i].days() << ',' << num(stats::variance(runs[i].returns))
            << ',' << num(stats::excess_kurtosis(runs[i].returns)) << ','
            << io::sha256_file(sub / "returns.csv") << '\n';
  }
  write_text(dir / "ensemble.csv", summary.str());
  m.config = io::to_json(cfg);
  m.seed = cfg.seed;
  m.extra["ensemble_seeds"] = seeds;
  write_manifest(dir, m);
  std::cout << "model " << sim::to_string(model) << ": " << runs.size() << " runs -> "
            << dir.string() << '\n';
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOpts {
  std::vector<std::string> in;
  std::string panel, sectors, out, column = "R", format = "json";
  int max_lag = 50;
  double tail_fraction = 0.05;
  int modes = 3;
  bool forward_fill = false;
};

std::vector<double> load_column(const std::string& path, const std::string& column) {
  return abm::ingest::load_numeric_table(path).column(column);
}

void cmd_analyze_stats(const AnalyzeOpts& o, Manifest& m) {
  using namespace abm;
  if (o.in.size() != 1) throw Error(ErrorKind::validation, "analyze stats takes one --in file");
  const auto raw = load_column(o.in[0], o.column);
  const auto r = estimator("normalize", [&] { return stats::normalize(raw); });
  std::vector<double> vol(r.values.size());
  std::transform(r.values.begin(), r.values.end(), vol.begin(), [](double x) { return std::abs(x); });
  const auto A = estimator("A", [&] { return stats::autocorrelation_abs(r.values, o.max_lag); });
  const auto L = estimator("L", [&] { return stats::return_volatility_correlation(r.values, o.max_lag); });
  const double hurst = estimator("hurst", [&] { return stats::hurst_exponent(vol); });
  const double tail = estimator("tail_exponent", [&] { return stats::tail_exponent(r.values, o.tail_fraction); });

  const fs::path dir = resolve_out(o.out, "analyze-stats");
  fs::create_directories(dir);
  json j{{"input", o.in[0]}, {"column", o.column}, {"days", raw.size()},
         {"mean", r.mean_removed}, {"sigma", r.sigma},
         {"excess_kurtosis", stats::excess_kurtosis(r.values)}, {"hurst", hurst},
         {"hurst_signal", "|r|"}, {"tail_exponent", tail}, {"tail_fraction", o.tail_fraction},
         {"max_lag", o.max_lag}};
  if (o.format == "csv") {
    write_with(dir / "stats.csv", [&](std::ostream& out) {
      out << "key,value\n";
      for (const char* key : {"days", "mean", "sigma", "excess_kurtosis", "hurst", "tail_exponent", "tail_fraction"})
        out << key << ',' << j[key].dump() << '\n';
    });
  } else {
    j["A"] = curve_json(A);
    j["L"] = curve_json(L);
    write_json(dir / "stats.json", j);
  }
  write_with(dir / "acf.csv", [&](std::ostream& out) { write_curve_csv(out, "A", A.lags, A.values); });
  m.inputs = o.in;
  std::cout << "hurst " << num(hurst) << "  tail " << num(tail) << " -> " << dir.string() << '\n';
  write_manifest(dir, m);
}

void cmd_analyze_lcurve(const AnalyzeOpts& o, Manifest& m) {
  using namespace abm;
  if (o.in.empty()) throw Error(ErrorKind::validation, "analyze lcurve needs --in");
  std::vector<stats::CorrelationCurve> curves;
  for (const auto& path : o.in) {
    const auto raw = load_column(path, o.column);
    const auto r = estimator("normalize", [&] { return stats::normalize(raw); });
    curves.push_back(estimator("L", [&] { return stats::return_volatility_correlation(r.values, o.max_lag); }));
  }
  stats::CorrelationCurve mean_curve = curves.front();
  std::optional<stats::EnsembleCurve> ens;
  if (curves.size() > 1) {
    ens = stats::ensemble_mean(curves);
    mean_curve = ens->mean;
  }

  const fs::path dir = resolve_out(o.out, "analyze-lcurve");
  fs::create_directories(dir);
  json fit;
  try {
    fit = fit_json(stats::fit_exponential(mean_curve));
  } catch (const Error& e) {
    // A curve that crosses zero has no exponential fit; record why.
    if (e.kind() != ErrorKind::fit_domain) throw;
    fit = json{{"model", "exponential"}, {"error", e.what()}};
  }
  json j{{"inputs", o.in}, {"column", o.column}, {"max_lag", o.max_lag},
         {"ensemble_size", curves.size()}, {"fit", fit}};
  if (o.format == "json") {
    j["L"] = curve_json(mean_curve);
    if (ens) j["stderr"] = ens->standard_error;
  }
  write_with(dir / "lcurve.csv", [&](std::ostream& out) {
    write_curve_csv(out, "L", mean_curve.lags, mean_curve.values, ens ? &ens->standard_error : nullptr);
  });
  write_json(dir / "lcurve.json", j);
  m.inputs = o.in;
  std::cout << "L(1) " << num(mean_curve.values.front()) << " over " << curves.size()
            << " series -> " << dir.string() << '\n';
  write_manifest(dir, m);
}

void cmd_analyze_spectrum(const AnalyzeOpts& o, Manifest& m) {
  using namespace abm;
  const auto panel = ingest::load_returns_panel(o.panel, o.sectors, {o.forward_fill});
  const auto C = spectral::cross_correlation(panel);
  const auto sys = spectral::eigen_decompose(C);
  std::vector<std::string> sector_of_component;
  for (const auto& t : panel.tickers) sector_of_component.push_back(panel.sector_of.at(t));
  const auto modes = std::min<std::size_t>(static_cast<std::size_t>(std::max(o.modes, 1)), C.order);
  const auto report = spectral::mode_report(sys, sector_of_component, modes);

  json jm = json::array();
  for (const auto& md : report.modes)
    jm.push_back({{"eigenvalue", md.eigenvalue}, {"participation_ratio", md.participation_ratio},
                  {"sector_mass", md.sector_mass}, {"dominant_sector", md.dominant_sector},
                  {"dominance_ratio", md.dominance_ratio}});
  json j{{"n", C.order}, {"T", panel.rows()}, {"eigenvalues", sys.eigenvalues},
         {"sector_ids", report.sector_ids}, {"modes", jm}};
  if (panel.rows() > C.order) {
    const auto [lo, hi] = spectral::marchenko_pastur_bounds(C.order, panel.rows());
    j["marchenko_pastur"] = {{"lambda_minus", lo}, {"lambda_plus", hi}};
  }

  const fs::path dir = resolve_out(o.out, "analyze-spectrum");
  fs::create_directories(dir);
  write_json(dir / "eigenvalues.json", j);
  write_with(dir / "eigenvectors.csv", [&](std::ostream& out) {
    out << "ticker,sector";
    for (std::size_t a = 0; a < modes; ++a) out << ",u" << a;
    out << '\n';
    for (auto i : spectral::sector_order(panel.tickers, sector_of_component)) {
      out << panel.tickers[i] << ',' << sector_of_component[i];
      for (std::size_t a = 0; a < modes; ++a) out << ',' << num(sys.eigenvectors[a][i]);
      out << '\n';
    }
  });
  m.inputs = {o.panel, o.sectors};
  std::cout << "lambda_0 " << num(sys.eigenvalues.front()) << " of n=" << C.order << " -> "
            << dir.string() << '\n';
  write_manifest(dir, m);
}

// ---------------------------------------------------------------------------
// Dispatch

int run(std::vector<std::string> args);

int cmd_pipeline(const std::string& path) {
  const json p = abm::io::parse_json_file(path);
  if (!p.contains("steps") || !p["steps"].is_array())
    throw abm::Error(abm::ErrorKind::config, path + ": pipeline needs a 'steps' array");
  std::map<std::string, std::string> vars;
  if (p.contains("vars"))
    for (const auto& [k, v] : p["vars"].items()) vars[k] = v.get<std::string>();
  if (!vars.count("out")) vars["out"] = default_out("pipeline").string();
  int step = 0;
  for (const auto& s : p["steps"]) {
    ++step;
    std::vector<std::string> argv;
    for (const auto& a : s) {
      std::string arg = a.get<std::string>();
      for (const auto& [k, v] : vars) {
        const std::string key = "${" + k + "}";
        for (auto pos = arg.find(key); pos != std::string::npos; pos = arg.find(key, pos + v.size()))
          arg.replace(pos, key.size(), v);
      }
      argv.push_back(arg);
    }
    std::cout << "[" << step << "] " << join_args(argv) << '\n';
    if (const int rc = run(argv); rc != 0) {
      std::cerr << "pipeline step " << step << " failed with exit code " << rc << '\n';
      return rc;
    }
  }
  return 0;
}

int run(std::vector<std::string> args) {
  const std::string command_line = join_args(args);
  CLI::App app{"Agent-based market simulation, calibration and analysis", "abmsim"};
  app.footer(kFormatsHelp);
  app.set_version_flag("--version", abm::kVersion);
  app.require_subcommand(1);

  CalibrateOpts co;
  auto* cal = app.add_subcommand("calibrate", "estimate model parameters from data");
  cal->require_subcommand(1);
  auto* cal_asym = cal->add_subcommand("asymmetry", "alpha, delta_r and delta_R from an index series");
  cal_asym->add_option("--index", co.index, "index.csv with a volume column")->required();
  cal_asym->add_option("--k", co.k, "k used for R'(t)")->capture_default_str();
  cal_asym->add_option("--M", co.M, "maximum horizon M used for R'(t)")->capture_default_str();
  cal_asym->add_option("--shift-fit", co.shift_fit, "delta_r -> delta_R line: affine or origin")
      ->check(CLI::IsMember({"affine", "origin"}))
      ->capture_default_str();
  auto* cal_co = cal->add_subcommand("comovement", "H_M and H_j from a returns panel");
  cal_co->add_option("--panel", co.panel, "panel.csv")->required();
  cal_co->add_option("--sectors", co.sectors, "sectors.csv")->required();
  cal_co->add_flag("--forward-fill", co.forward_fill, "fill gaps of <= 2 days with zero returns");
  auto* cal_inf = cal->add_subcommand("infoforce", "tau, driving forces and delta_F from search volumes");
  cal_inf->add_option("--search", co.search, "search.csv (week_start,ticker,volume)")->required();
  cal_inf->add_option("--volumes", co.volumes, "weekly trading volumes, same schema as search.csv")->required();
  cal_inf->add_option("--market", co.market, "weekly market index, index.csv schema")->required();
  cal_inf->add_option("--tau", co.tau, "window in weeks; estimated from the data when omitted");
  for (auto* sc : {cal_asym, cal_co, cal_inf}) sc->add_option("--out", co.out, "output directory");

  SimulateOpts so;
  auto* sim = app.add_subcommand("simulate", "run a model and write returns, diagnostics and a manifest");
  sim->add_option("--model", so.model, "a, b, c or d")->required()->check(CLI::IsMember({"a", "b", "c", "d"}));
  sim->add_option("--config", so.config, "JSON config or calibration report");
  sim->add_option("--seed", so.seed, "RNG seed (overrides the config)");
  sim->add_option("--t-max", so.t_max, "total days including warmup (overrides the config)");
  sim->add_option("--out", so.out, "output directory");
  sim->add_option("--ensemble", so.ensemble, "run K seeds (seed, seed+1, ...) into seed_<s>/ subdirectories");
  sim->add_option("--jobs", so.jobs, "worker threads for --ensemble")->capture_default_str();

  AnalyzeOpts ao;
  auto* ana = app.add_subcommand("analyze", "statistics of simulated or ingested returns");
  ana->require_subcommand(1);
  auto* ana_stats = ana->add_subcommand("stats", "A(t), L(t), Hurst exponent and tail exponent");
  auto* ana_l = ana->add_subcommand("lcurve", "L(t) with an exponential fit; several --in give an ensemble mean");
  auto* ana_spec = ana->add_subcommand("spectrum", "correlation-matrix eigenvalues and sector modes");
  for (auto* sc : {ana_stats, ana_l}) {
    sc->add_option("--in", ao.in, "returns CSV (first column a label)")->required();
    sc->add_option("--column", ao.column, "column to analyze")->capture_default_str();
    sc->add_option("--max-lag", ao.max_lag, "largest lag")->capture_default_str();
  }
  ana_stats->add_option("--tail-fraction", ao.tail_fraction, "Hill tail fraction")->capture_default_str();
  ana_spec->add_option("--panel", ao.panel, "panel.csv")->required();
  ana_spec->add_option("--sectors", ao.sectors, "sectors.csv")->required();
  ana_spec->add_option("--modes", ao.modes, "eigenvectors to report")->capture_default_str();
  ana_spec->add_flag("--forward-fill", ao.forward_fill, "fill gaps of <= 2 days with zero returns");
  for (auto* sc : {ana_stats, ana_l, ana_spec}) {
    sc->add_option("--out", ao.out, "output directory");
    sc->add_option("--format", ao.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  }

  std::string pipeline_file;
  auto* pipe = app.add_subcommand("pipeline", "run a JSON list of abmsim commands");
  pipe->add_option("file", pipeline_file, "pipeline JSON: {\"vars\": {...}, \"steps\": [[args...], ...]}")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Manifest m;
  m.command_line = command_line;
  try {
    if (*pipe) return cmd_pipeline(pipeline_file);
    if (*cal) {
      m.command = "calibrate";
      if (*cal_asym) { m.command += " asymmetry"; cmd_calibrate_asymmetry(co, m); }
      else if (*cal_co) { m.command += " comovement"; cmd_calibrate_comovement(co, m); }
      else { m.command += " infoforce"; cmd_calibrate_infoforce(co, m); }
    } else if (*sim) {
      m.command = "simulate";
      cmd_simulate(so, m);
    } else {
      if (*ana_stats) { m.command = "analyze stats"; cmd_analyze_stats(ao, m); }
      else if (*ana_l) { m.command = "analyze lcurve"; cmd_analyze_lcurve(ao, m); }
      else { m.command = "analyze spectrum"; cmd_analyze_spectrum(ao, m); }
    }
  } catch (const abm::Error& e) {
    std::cerr << "abmsim: " << abm::to_string(e.kind()) << " error: " << e.what() << '\n';
    return e.is_input_error() ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "abmsim: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "abmsim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  return run(std::vector<std::string>(argv + 1, argv + argc));
}
