#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "beamfactory/analysis.hpp"
#include "beamfactory/errors.hpp"
#include "beamfactory/grid_io.hpp"
#include "beamfactory/propagation.hpp"
#include "beamfactory/scenario.hpp"
#include "beamfactory/switchoff.hpp"
#include "beamfactory/trace_io.hpp"

#ifndef BEAMFACTORY_VERSION
#define BEAMFACTORY_VERSION "0.0.0"
#endif

namespace beamfactory::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", md[k]);
  return hex;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Output directory plus the manifest of what was written into it.
class Bundle {
 public:
  Bundle(fs::path dir, std::string command) : dir_(std::move(dir)) {
    manifest_["tool"] = "beamfactory";
    manifest_["version"] = BEAMFACTORY_VERSION;
    manifest_["command"] = std::move(command);
    manifest_["inputs"] = json::object();
    manifest_["seeds"] = json::array();
    manifest_["parameters"] = json::object();
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create '{}': {}", dir_.string(), ec.message()));
  }

  const fs::path& dir() const { return dir_; }
  json& manifest() { return manifest_; }

  void input(const std::string& role, const fs::path& path, std::string_view content) {
    manifest_["inputs"][role] = {{"path", path.string()}, {"sha256", sha256_hex(content)}};
  }
  void seed(std::uint64_t s) { manifest_["seeds"].push_back(s); }
  template <class T>
  void param(const std::string& key, const T& value) {
    manifest_["parameters"][key] = value;
  }

  void write(const std::string& name, const std::string& content) {
    if (name.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos ||
        name == "." || name == ".." || name == "manifest.json") {
      throw std::logic_error(fmt::format("refusing to write '{}'", name));
    }
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", (dir_ / name).string()));
    f << content;
    f.close();
    if (!f) throw std::runtime_error(fmt::format("write failed for '{}'", (dir_ / name).string()));
    files_[name] = {sha256_hex(content), content.size()};
  }

  void finish() {
    json files = json::array();
    for (const auto& [name, info] : files_) {
      files.push_back({{"name", name}, {"sha256", info.first}, {"bytes", info.second}});
    }
    manifest_["files"] = std::move(files);
    std::ofstream f(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
    f << manifest_.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write manifest.json");
  }

 private:
  fs::path dir_;
  json manifest_;
  std::map<std::string, std::pair<std::string, std::size_t>> files_;
};

fs::path resolve_out(const std::string& flag, const Scenario* scenario) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("BEAMFACTORY_OUT"); env != nullptr && *env != '\0') return env;
  if (scenario && scenario->output_dir) return *scenario->output_dir;
  throw UsageError("no output directory: pass --out or set BEAMFACTORY_OUT");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw UsageError(fmt::format("empty item in list '{}'", s));
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

double parse_double(const std::string& s, std::string_view what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::logic_error&) {
    throw UsageError(fmt::format("invalid {} '{}'", what, s));
  }
}

std::pair<double, double> parse_grid(const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 2) throw UsageError(fmt::format("--grid expects dx,dy, got '{}'", s));
  const double dx = parse_double(parts[0], "grid size");
  const double dy = parse_double(parts[1], "grid size");
  if (!(dx > 0.0) || !(dy > 0.0)) throw UsageError("--grid sizes must be > 0");
  return {dx, dy};
}

struct LoadedScenario {
  Scenario scenario;
  std::string content;
};

std::optional<LoadedScenario> maybe_scenario(const std::string& path) {
  if (path.empty()) return std::nullopt;
  std::string content = read_file(path);
  try {
    return LoadedScenario{parse_scenario(content), std::move(content)};
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.where(),
                      std::string(e.what()).substr(e.where().empty() ? 0 : e.where().size() + 2));
  }
}

MeasurementTrace load_trace(const std::string& path, std::string& content) {
  content = read_file(path);
  std::istringstream in(content);
  try {
    return read_trace_csv(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.where(),
                      std::string(e.what()).substr(e.where().empty() ? 0 : e.where().size() + 2));
  }
}

std::string trace_csv(const MeasurementTrace& t) {
  std::ostringstream s;
  write_trace_csv(s, t);
  return s.str();
}

std::string grid_csv(const GridSpec& g, const std::vector<std::optional<double>>& v, int decimals = 2) {
  std::ostringstream s;
  write_grid_matrix(s, g, v, decimals);
  return s.str();
}

// Grid over the scenario layout, or over the trace footprint without one.
GridSpec analysis_grid(const std::optional<LoadedScenario>& sc, const MeasurementTrace& trace,
                       const std::string& grid_flag) {
  std::optional<std::pair<double, double>> cell;
  if (!grid_flag.empty()) cell = parse_grid(grid_flag);
  if (sc) {
    const auto& a = sc->scenario.analysis;
    return sc->scenario.analysis_grid(cell ? cell->first : a.cell_dx, cell ? cell->second : a.cell_dy);
  }
  if (trace.empty()) throw InvalidArgument("trace is empty");
  Rect r{trace.samples[0].position.x, trace.samples[0].position.y, trace.samples[0].position.x,
         trace.samples[0].position.y};
  for (const auto& s : trace.samples) {
    r.x_min = std::min(r.x_min, s.position.x);
    r.y_min = std::min(r.y_min, s.position.y);
    r.x_max = std::max(r.x_max, s.position.x);
    r.y_max = std::max(r.y_max, s.position.y);
  }
  const double dx = cell ? cell->first : 1.0;
  const double dy = cell ? cell->second : 1.0;
  r.x_min = std::floor(r.x_min / dx) * dx;
  r.y_min = std::floor(r.y_min / dy) * dy;
  return GridSpec::covering(r, dx, dy);
}

void record_grid(Bundle& b, const GridSpec& g) {
  b.param("grid", json{{"origin_x_m", g.origin().x},
                       {"origin_y_m", g.origin().y},
                       {"cell_dx_m", g.cell_dx()},
                       {"cell_dy_m", g.cell_dy()},
                       {"nx", g.nx()},
                       {"ny", g.ny()}});
}

std::string delta_table(const BeamDeltaStats& d) {
  std::string s = "order,count,p25_db,p50_db,p75_db\n";
  for (int i = 2; i <= d.max_i; ++i) {
    const auto& cdf = d.order(i);
    if (cdf.empty()) {
      s += fmt::format("{},0,,,\n", i);
      continue;
    }
    s += fmt::format("{},{},{:.3f},{:.3f},{:.3f}\n", i, cdf.size(), cdf.quantile(0.25),
                     cdf.quantile(0.5), cdf.quantile(0.75));
  }
  return s;
}

std::string delta_cdf(const BeamDeltaStats& d) {
  std::string s = "order,delta_db,probability\n";
  for (int i = 2; i <= d.max_i; ++i) {
    for (const auto& [v, p] : d.order(i).points()) s += fmt::format("{},{:.2f},{:.6f}\n", i, v, p);
  }
  return s;
}

// --- simulate -------------------------------------------------------------------

struct SimulateOpts {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<unsigned> workers;
};

int cmd_simulate(const SimulateOpts& o, std::ostream& out) {
  const auto sc = maybe_scenario(o.scenario);
  Bundle bundle(resolve_out(o.out, sc ? &sc->scenario : nullptr), "simulate");
  const std::uint64_t seed = o.seed.value_or(sc->scenario.seed);
  bundle.input("scenario", o.scenario, sc->content);
  bundle.seed(seed);
  bundle.param("model", sc->scenario.model_name);
  bundle.param("config", std::string(to_string(sc->scenario.beams.config)));
  bundle.param("fading_sigma_db", sc->scenario.fading_sigma_db);

  const MeasurementTrace trace = simulate(sc->scenario, seed, o.workers);
  bundle.write("trace.csv", trace_csv(trace));
  bundle.finish();
  out << fmt::format("simulated {} bursts over {} routes -> {}\n", trace.samples.size(),
                     sc->scenario.routes.size(), (bundle.dir() / "trace.csv").string());
  return kExitOk;
}

// --- analyze --------------------------------------------------------------------

const std::vector<std::string> kAnalyses = {"grid", "gamma", "coverage", "delta", "dominance", "smoothing"};

struct AnalyzeOpts {
  std::string trace;
  std::string trace_b;
  std::string scenario;
  std::string out;
  std::string analyses;
  std::string grid;
  std::optional<double> threshold;
  int max_order = 4;
  std::string subset;
  double window_wavelengths = 40.0;
};

int cmd_analyze(const AnalyzeOpts& o, std::ostream& out) {
  std::vector<std::string> names;
  if (!o.analyses.empty()) {
    names = split_list(o.analyses);
    for (const auto& n : names) {
      if (std::find(kAnalyses.begin(), kAnalyses.end(), n) == kAnalyses.end()) {
        std::string all;
        for (const auto& a : kAnalyses) all += (all.empty() ? "" : ", ") + a;
        throw UsageError(fmt::format("unknown analysis '{}'; available: {}", n, all));
      }
    }
  }
  const auto wants = [&](std::string_view n) { return std::find(names.begin(), names.end(), n) != names.end(); };
  const auto sc = maybe_scenario(o.scenario);
  if (!sc && (wants("coverage") || wants("smoothing"))) {
    throw UsageError("coverage and smoothing analyses need --scenario for the layout");
  }
  if (wants("gamma") && o.trace_b.empty()) throw UsageError("gamma analysis needs --trace-b");
  if (wants("dominance") && o.subset.empty()) throw UsageError("dominance analysis needs --subset");

  Bundle bundle(resolve_out(o.out, sc ? &sc->scenario : nullptr), "analyze");
  std::string content;
  const MeasurementTrace trace = load_trace(o.trace, content);
  bundle.input("trace", o.trace, content);
  if (sc) bundle.input("scenario", o.scenario, sc->content);
  bundle.param("analyses", names);

  std::optional<GridSpec> grid;
  const auto get_grid = [&]() -> const GridSpec& {
    if (!grid) {
      grid = analysis_grid(sc, trace, o.grid);
      record_grid(bundle, *grid);
    }
    return *grid;
  };

  for (const auto& name : names) {
    if (name == "grid") {
      const GridStat g = local_average(trace, get_grid());
      bundle.write("grid_rsrp.csv", grid_csv(g.grid, g.mean));
      bundle.write("grid_rsrp.json", grid_sidecar_json(g.grid, "mean strongest RSRP", "dBm"));
      std::vector<std::optional<double>> counts(g.count.begin(), g.count.end());
      bundle.write("grid_count.csv", grid_csv(g.grid, counts, 0));
    } else if (name == "gamma") {
      std::string content_b;
      const MeasurementTrace b = load_trace(o.trace_b, content_b);
      bundle.input("trace_b", o.trace_b, content_b);
      const ComparisonMap m = gamma_map(local_average(trace, get_grid()), local_average(b, get_grid()));
      bundle.write("gamma.csv", grid_csv(m.grid, m.gamma));
      bundle.write("gamma.json", grid_sidecar_json(m.grid, "gamma (trace minus trace-b)", "dB"));
    } else if (name == "coverage") {
      const double threshold = o.threshold.value_or(sc->scenario.analysis.threshold_dbm);
      bundle.param("threshold_dbm", threshold);
      const auto bins = sc->scenario.distance_bins();
      const auto cov = coverage_probability(trace, threshold, bins, sc->scenario.layout);
      std::string table = "d_lo_m,d_hi_m,count,p_below\n";
      std::string cdf = "d_lo_m,d_hi_m,rsrp_dbm,probability\n";
      for (const auto& c : cov) {
        table += fmt::format("{:.2f},{:.2f},{},{}\n", c.bin.d_lo, c.bin.d_hi, c.count,
                             c.probability ? fmt::format("{:.6f}", *c.probability) : "");
        for (const auto& [v, p] : c.cdf.points()) {
          cdf += fmt::format("{:.2f},{:.2f},{:.2f},{:.6f}\n", c.bin.d_lo, c.bin.d_hi, v, p);
        }
      }
      bundle.write("coverage.csv", table);
      bundle.write("coverage_cdf.csv", cdf);
    } else if (name == "delta") {
      bundle.param("max_order", o.max_order);
      const BeamDeltaStats d = delta_stats(trace, o.max_order);
      bundle.write("delta_percentiles.csv", delta_table(d));
      bundle.write("delta_cdf.csv", delta_cdf(d));
    } else if (name == "dominance") {
      std::vector<SsbId> subset;
      for (const auto& s : split_list(o.subset)) {
        try {
          subset.push_back(parse_ssb_id(s));
        } catch (const InvalidArgument& e) {
          throw UsageError(e.what());
        }
      }
      bundle.param("subset", split_list(o.subset));
      const DominanceMap d = dominance_map(trace, subset, get_grid());
      bundle.write("dominance.csv", grid_csv(d.grid, d.fraction, 4));
      bundle.write("dominance.json", grid_sidecar_json(d.grid, "subset dominance fraction", "1"));
    } else if (name == "smoothing") {
      bundle.param("window_wavelengths", o.window_wavelengths);
      const SmoothedRoute r = route_smoothing(trace.samples, sc->scenario.layout,
                                              sc->scenario.budget.carrier_freq, o.window_wavelengths);
      std::string s = "sample,traveled_m,azimuth_deg,beam,rsrp_dbm\n";
      for (std::size_t k = 0; k < r.traveled.size(); ++k) {
        for (std::size_t b = 0; b < r.beams.size(); ++b) {
          if (!r.rsrp[b][k]) continue;
          s += fmt::format("{},{:.3f},{:.3f},{},{:.3f}\n", k, r.traveled[k], r.azimuth[k],
                           to_string(r.beams[b]), *r.rsrp[b][k]);
        }
      }
      bundle.write("smoothing.csv", s);
    }
  }
  bundle.finish();
  out << fmt::format("{} analyses -> {}\n", names.size(), bundle.dir().string());
  return kExitOk;
}

// --- fit ------------------------------------------------------------------------

struct FitOpts {
  std::string trace;
  std::string pg_csv;
  std::string scenario;
  std::string out;
  bool split = false;
};

std::vector<DistanceSample> read_pg_csv(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || line != "d_m,pg_db") throw ConfigError("line 1", "expected header 'd_m,pg_db'");
  std::vector<DistanceSample> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("fields");
      std::size_t p1 = 0;
      std::size_t p2 = 0;
      const std::string a = line.substr(0, comma);
      const std::string b = line.substr(comma + 1);
      const double d = std::stod(a, &p1);
      const double pg = std::stod(b, &p2);
      if (p1 != a.size() || p2 != b.size()) throw std::invalid_argument("trailing");
      out.push_back({d, pg});
    } catch (const std::logic_error&) {
      throw ConfigError(fmt::format("line {}", n), "expected two numbers 'd_m,pg_db'");
    }
  }
  return out;
}

int cmd_fit(const FitOpts& o, std::ostream& out) {
  if (o.trace.empty() == o.pg_csv.empty()) throw UsageError("give exactly one of --trace or --pg-csv");
  const auto sc = maybe_scenario(o.scenario);
  if (!o.trace.empty() && !sc) throw UsageError("fitting a trace needs --scenario for the link budget");
  if (o.split && o.trace.empty()) throw UsageError("--split needs --trace and --scenario");

  Bundle bundle(resolve_out(o.out, sc ? &sc->scenario : nullptr), "fit");
  std::map<std::string, std::vector<DistanceSample>> blocks;
  if (!o.pg_csv.empty()) {
    const std::string content = read_file(o.pg_csv);
    bundle.input("pg_csv", o.pg_csv, content);
    blocks["all"] = read_pg_csv(content);
  } else {
    std::string content;
    const MeasurementTrace trace = load_trace(o.trace, content);
    bundle.input("trace", o.trace, content);
    bundle.input("scenario", o.scenario, sc->content);
    const Scenario& s = sc->scenario;
    for (const auto& sample : trace.samples) {
      const auto best = strongest_entry(sample);
      if (!best) continue;
      const double pg = extract_path_gain(sample.beams[*best], sample.position, s.budget, s.beams, s.layout);
      const double d = s.layout.angles_to_tx(sample.position).distance_3d;
      if (d < 1.0) continue;
      const std::string key =
          o.split ? std::string(to_string(s.layout.classify_visibility(sample.position))) : "all";
      blocks[key].push_back({d, pg});
    }
  }
  bundle.param("split", o.split);

  std::string fit_csv = "block,samples,pg_1m_db,n,sigma_db\n";
  std::string rmse_csv = "block,preset,label,pg_1m_db,n,sigma_db,rmse_db\n";
  out << fmt::format("{:<6} {:>8} {:>10} {:>7} {:>9}\n", "block", "samples", "PG_1m[dB]", "n", "sigma[dB]");
  std::string rmse_text;
  for (const auto& [block, samples] : blocks) {
    const PathGainModel m = fit_slope_intercept(samples);
    fit_csv += fmt::format("{},{},{:.4f},{:.4f},{:.4f}\n", block, samples.size(), m.pg_1m, m.n, m.sigma);
    out << fmt::format("{:<6} {:>8} {:>10.2f} {:>7.3f} {:>9.2f}\n", block, samples.size(), m.pg_1m, m.n,
                       m.sigma);
    for (const auto& p : preset_table()) {
      if (block != "all" && to_string(p.block) != block) continue;
      const double r = model_rmse(p.model, samples);
      rmse_csv += fmt::format("{},{},{},{:.1f},{:.2f},{:.1f},{:.4f}\n", block, p.name, p.label,
                              p.model.pg_1m, p.model.n, p.model.sigma, r);
      rmse_text += fmt::format("{:<6} {:<24} {:>7.1f} {:>5.2f} {:>9.2f}\n", block, p.label, p.model.pg_1m,
                               p.model.n, r);
    }
  }
  out << fmt::format("\n{:<6} {:<24} {:>7} {:>5} {:>9}\n", "block", "model", "PG_1m", "n", "RMSE[dB]")
      << rmse_text;
  bundle.write("fit.csv", fit_csv);
  bundle.write("rmse.csv", rmse_csv);
  bundle.finish();
  return kExitOk;
}

// --- optimize -------------------------------------------------------------------

const std::vector<std::string> kSolvers = {"exhaustive", "ga", "dbscan"};

struct OptimizeOpts {
  std::string trace;
  std::string scenario;
  std::string out;
  std::string xi = "3,5,10";
  std::string solvers = "ga,dbscan,exhaustive";
  std::string grid;
  std::optional<std::uint64_t> seed;
  std::size_t runs = 1;
  GaParams ga;
  DbscanSelectParams db;
  double floor_dbm = kDefaultSwitchOffFloorDbm;
};

int cmd_optimize(const OptimizeOpts& o, std::ostream& out) {
  std::vector<std::size_t> xis;
  for (const auto& s : split_list(o.xi)) {
    const double v = parse_double(s, "xi");
    if (v < 1.0 || v != std::floor(v)) throw UsageError(fmt::format("xi must be a positive integer, got '{}'", s));
    xis.push_back(static_cast<std::size_t>(v));
  }
  const auto solvers = split_list(o.solvers);
  for (const auto& s : solvers) {
    if (std::find(kSolvers.begin(), kSolvers.end(), s) == kSolvers.end()) {
      throw UsageError(fmt::format("unknown solver '{}'; available: exhaustive, ga, dbscan", s));
    }
  }
  if (o.runs < 1) throw UsageError("--runs must be >= 1");
  try {
    o.ga.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }

  const auto sc = maybe_scenario(o.scenario);
  Bundle bundle(resolve_out(o.out, sc ? &sc->scenario : nullptr), "optimize");
  std::string content;
  const MeasurementTrace trace = load_trace(o.trace, content);
  if (trace.empty()) throw InvalidArgument("trace is empty");
  bundle.input("trace", o.trace, content);
  if (sc) bundle.input("scenario", o.scenario, sc->content);
  const std::uint64_t seed = o.seed.value_or(sc ? sc->scenario.seed : 0);
  for (std::size_t r = 0; r < o.runs; ++r) bundle.seed(seed + r);
  const GridSpec grid = analysis_grid(sc, trace, o.grid);
  record_grid(bundle, grid);
  bundle.param("xi", xis);
  bundle.param("solvers", solvers);
  bundle.param("floor_dbm", o.floor_dbm);
  bundle.param("ga", json{{"pop_size", o.ga.pop_size},
                          {"generations", o.ga.generations},
                          {"tournament_k", o.ga.tournament_k},
                          {"crossover_rate", o.ga.crossover_rate}});
  bundle.param("dbscan", json{{"eps", o.db.eps}, {"min_pts", o.db.min_pts}, {"rsrp_weight", o.db.rsrp_weight}});

  const SwitchOffProblem base = build_problem(trace, grid, 1, o.floor_dbm);
  std::string rows = "xi,solver,seed,mask,enabled,objective_db,evaluations,fallback,status\n";
  std::string timing = "xi,solver,seed,wall_s\n";
  using clock = std::chrono::steady_clock;
  for (const std::size_t xi : xis) {
    const SwitchOffProblem p = base.with_xi(xi);
    for (const auto& solver : solvers) {
      const std::size_t reps = solver == "ga" ? o.runs : 1;
      for (std::size_t r = 0; r < reps; ++r) {
        const std::uint64_t s = solver == "ga" ? seed + r : 0;
        const auto t0 = clock::now();
        try {
          SolverResult res;
          if (solver == "exhaustive") {
            res = solve_exhaustive(p);
          } else if (solver == "ga") {
            res = solve_ga(p, o.ga, s);
          } else {
            res = solve_dbscan(p, o.db);
          }
          std::string enabled;
          for (std::size_t k : res.mask.enabled()) {
            enabled += (enabled.empty() ? "" : " ") + to_string(p.beams()[k]);
          }
          rows += fmt::format("{},{},{},{},{},{:.6f},{},{},ok\n", xi, solver, s, res.mask.to_string(), enabled,
                              res.objective, res.evaluations, res.fallback ? 1 : 0);
          out << fmt::format("xi={:<3} {:<10} seed={:<4} f={:.4f} dB  evals={}\n", xi, solver, s,
                             res.objective, res.evaluations);
        } catch (const SearchTooLarge& e) {
          rows += fmt::format("{},{},{},,,,,,error: search too large\n", xi, solver, s);
          out << fmt::format("xi={:<3} {:<10} skipped: {}\n", xi, solver, e.what());
        }
        timing += fmt::format("{},{},{},{:.6f}\n", xi, solver, s,
                              std::chrono::duration<double>(clock::now() - t0).count());
      }
    }
  }
  std::ostringstream table;
  base.write_table_csv(table);
  bundle.write("optimize.csv", rows);
  bundle.write("cell_beam_means.csv", table.str());
  bundle.write("timing.csv", timing);
  bundle.finish();
  return kExitOk;
}

// --- compare --------------------------------------------------------------------

struct CompareOpts {
  std::string scenario;
  std::string out;
  std::string grid;
  std::optional<std::uint64_t> seed;
  int max_order = 4;
};

int cmd_compare(const CompareOpts& o, std::ostream& out) {
  const auto sc = maybe_scenario(o.scenario);
  Bundle bundle(resolve_out(o.out, &sc->scenario), "compare");
  const std::uint64_t seed = o.seed.value_or(sc->scenario.seed);
  bundle.input("scenario", o.scenario, sc->content);
  bundle.seed(seed);

  PatternDefaults pattern;
  pattern.floor_db = sc->scenario.beams.floor_db;
  Scenario a = sc->scenario;
  a.beams = make_config(TxConfig::A, pattern);
  Scenario b = sc->scenario;
  b.beams = make_config(TxConfig::B, pattern);
  const MeasurementTrace ta = simulate(a, seed);
  const MeasurementTrace tb = simulate(b, seed);

  std::optional<std::pair<double, double>> cell;
  if (!o.grid.empty()) cell = parse_grid(o.grid);
  const GridSpec grid = sc->scenario.analysis_grid(cell ? cell->first : sc->scenario.analysis.cell_dx,
                                                   cell ? cell->second : sc->scenario.analysis.cell_dy);
  record_grid(bundle, grid);
  const GridStat ga = local_average(ta, grid);
  const GridStat gb = local_average(tb, grid);
  const ComparisonMap gamma = gamma_map(ga, gb);

  bundle.write("trace_a.csv", trace_csv(ta));
  bundle.write("trace_b.csv", trace_csv(tb));
  bundle.write("grid_rsrp_a.csv", grid_csv(grid, ga.mean));
  bundle.write("grid_rsrp_b.csv", grid_csv(grid, gb.mean));
  bundle.write("gamma.csv", grid_csv(grid, gamma.gamma));
  bundle.write("gamma.json", grid_sidecar_json(grid, "gamma (config A minus config B)", "dB"));
  bundle.write("delta_percentiles_a.csv", delta_table(delta_stats(ta, o.max_order)));
  bundle.write("delta_percentiles_b.csv", delta_table(delta_stats(tb, o.max_order)));
  bundle.finish();

  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : gamma.gamma) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  out << fmt::format("compared {} cells, mean gamma {:.2f} dB -> {}\n", n, n ? sum / static_cast<double>(n) : 0.0,
                     bundle.dir().string());
  return kExitOk;
}

// --- presets --------------------------------------------------------------------

int cmd_presets(const std::string& out_flag, std::ostream& out) {
  std::string csv = "name,label,block,pg_1m_db,n,sigma_db,d_min_m,d_max_m\n";
  for (const auto& p : preset_table()) {
    csv += fmt::format("{},{},{},{:.1f},{:.2f},{:.1f},{:.1f},{:.1f}\n", p.name, p.label, to_string(p.block),
                       p.model.pg_1m, p.model.n, p.model.sigma, p.d_min, p.d_max);
  }
  if (out_flag.empty() && std::getenv("BEAMFACTORY_OUT") == nullptr) {
    out << csv;
    return kExitOk;
  }
  Bundle bundle(resolve_out(out_flag, nullptr), "presets");
  bundle.write("presets.csv", csv);
  bundle.finish();
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Beam-management planning toolkit for mmWave factory deployments", "beamfactory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", BEAMFACTORY_VERSION);

  SimulateOpts sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Synthesize a measurement campaign from a scenario");
  simulate_cmd->add_option("--scenario", sim.scenario, "Scenario file (YAML)")->required();
  simulate_cmd->add_option("--seed", sim.seed, "Campaign seed (u64); defaults to the scenario seed");
  simulate_cmd->add_option("--out", sim.out, "Output directory");
  simulate_cmd->add_option("--workers", sim.workers, "Synthesis threads")->check(CLI::PositiveNumber);

  AnalyzeOpts an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Grid maps, CDFs and beam statistics from a trace");
  analyze_cmd->add_option("--trace", an.trace, "Trace CSV")->required();
  analyze_cmd->add_option("--analysis", an.analyses,
                          "Comma-separated: grid, gamma, coverage, delta, dominance, smoothing");
  analyze_cmd->add_option("--scenario", an.scenario, "Scenario file for layout, grid and link budget");
  analyze_cmd->add_option("--trace-b", an.trace_b, "Second trace for the gamma map");
  analyze_cmd->add_option("--out", an.out, "Output directory");
  analyze_cmd->add_option("--grid", an.grid, "Cell size dx,dy in meters");
  analyze_cmd->add_option("--threshold", an.threshold, "Coverage threshold, dBm");
  analyze_cmd->add_option("--max-order", an.max_order, "Highest beam order for delta statistics")
      ->check(CLI::Range(2, 64));
  analyze_cmd->add_option("--subset", an.subset, "Beam subset for dominance, e.g. B-1-1,B-1-2");
  analyze_cmd->add_option("--window-wavelengths", an.window_wavelengths, "Smoothing window")
      ->check(CLI::PositiveNumber);

  FitOpts fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a slope-intercept path gain model and score the presets");
  fit_cmd->add_option("--trace", fit.trace, "Trace CSV (needs --scenario)");
  fit_cmd->add_option("--pg-csv", fit.pg_csv, "Distance / path gain CSV with header d_m,pg_db");
  fit_cmd->add_option("--scenario", fit.scenario, "Scenario the trace was measured in");
  fit_cmd->add_option("--out", fit.out, "Output directory");
  fit_cmd->add_flag("--split", fit.split, "Fit LoS and NLoS samples separately");

  OptimizeOpts opt;
  auto* optimize_cmd = app.add_subcommand("optimize", "Beam switch-off under a cardinality bound");
  optimize_cmd->add_option("--trace", opt.trace, "Trace CSV")->required();
  optimize_cmd->add_option("--scenario", opt.scenario, "Scenario file for the grid");
  optimize_cmd->add_option("--out", opt.out, "Output directory");
  optimize_cmd->add_option("--xi", opt.xi, "Comma-separated cardinality bounds")->capture_default_str();
  optimize_cmd->add_option("--solver", opt.solvers, "Comma-separated: exhaustive, ga, dbscan")
      ->capture_default_str();
  optimize_cmd->add_option("--grid", opt.grid, "Cell size dx,dy in meters");
  optimize_cmd->add_option("--seed", opt.seed, "GA seed of the first run (u64)");
  optimize_cmd->add_option("--runs", opt.runs, "GA runs, seeds seed..seed+runs-1")->capture_default_str();
  optimize_cmd->add_option("--ga-pop", opt.ga.pop_size, "GA population")->capture_default_str();
  optimize_cmd->add_option("--ga-generations", opt.ga.generations, "GA generations")->capture_default_str();
  optimize_cmd->add_option("--dbscan-eps", opt.db.eps, "DBSCAN radius")->capture_default_str();
  optimize_cmd->add_option("--dbscan-min-pts", opt.db.min_pts, "DBSCAN core threshold")->capture_default_str();
  optimize_cmd->add_option("--floor", opt.floor_dbm, "RSRP counted for bursts with no enabled beam, dBm")
      ->capture_default_str();

  CompareOpts cmp;
  auto* compare_cmd = app.add_subcommand("compare", "Run configs A and B with a shared seed and map gamma");
  compare_cmd->add_option("--scenario", cmp.scenario, "Scenario file")->required();
  compare_cmd->add_option("--seed", cmp.seed, "Shared seed (u64)");
  compare_cmd->add_option("--out", cmp.out, "Output directory");
  compare_cmd->add_option("--grid", cmp.grid, "Cell size dx,dy in meters");
  compare_cmd->add_option("--max-order", cmp.max_order, "Highest beam order for delta statistics")
      ->check(CLI::Range(2, 64));

  std::string presets_out;
  auto* presets_cmd = app.add_subcommand("presets", "Print or export the path gain preset table");
  presets_cmd->add_option("--out", presets_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(sim, out);
    if (*analyze_cmd) return cmd_analyze(an, out);
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*optimize_cmd) return cmd_optimize(opt, out);
    if (*compare_cmd) return cmd_compare(cmp, out);
    if (*presets_cmd) return cmd_presets(presets_out, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"beamfactory"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace beamfactory::cli
