#include "beamfactory/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "beamfactory/errors.hpp"

namespace beamfactory {

namespace {

// YAML node plus the field path that led to it, for diagnostics.
class Field {
 public:
  Field(YAML::Node node, std::string path, int line) : node_(std::move(node)), path_(std::move(path)), line_(line) {
    if (node_ && node_.Mark().line >= 0) line_ = node_.Mark().line + 1;
  }

  const YAML::Node& node() const { return node_; }
  const std::string& path() const { return path_; }
  bool present() const { return node_.IsDefined() && !node_.IsNull(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(line_ > 0 ? fmt::format("{} (line {})", path_, line_) : path_, what);
  }

  Field child(const std::string& key) const {
    return {node_[key], path_.empty() ? key : path_ + "." + key, line_};
  }
  Field at(std::size_t k) const { return {node_[k], fmt::format("{}[{}]", path_, k), line_}; }

  std::size_t size() const { return node_.size(); }

  void expect_map(std::initializer_list<std::string_view> allowed) const {
    if (!node_.IsMap()) fail("expected a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        child(key).fail("unknown field");
      }
    }
  }
  void expect_seq() const {
    if (!node_.IsSequence()) fail("expected a list");
  }

  Field required(const std::string& key) const {
    Field f = child(key);
    if (!f.present()) f.fail("missing required field");
    return f;
  }

  double number() const {
    if (!node_.IsScalar()) fail("expected a number");
    try {
      const double v = node_.as<double>();
      if (!std::isfinite(v)) fail("expected a finite number");
      return v;
    } catch (const YAML::Exception&) {
      fail(fmt::format("expected a number, got '{}'", node_.Scalar()));
    }
  }
  double number_or(const std::string& key, double fallback) const {
    const Field f = child(key);
    return f.present() ? f.number() : fallback;
  }
  double positive_or(const std::string& key, double fallback) const {
    const Field f = child(key);
    if (!f.present()) return fallback;
    const double v = f.number();
    if (!(v > 0.0)) f.fail("must be > 0");
    return v;
  }

  std::uint64_t u64() const {
    if (!node_.IsScalar()) fail("expected an unsigned 64-bit integer");
    const std::string& s = node_.Scalar();
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) {
      fail(fmt::format("expected an unsigned 64-bit integer, got '{}'", s));
    }
    return v;
  }
  long integer() const {
    const double v = number();
    if (v != std::floor(v)) fail("expected an integer");
    return static_cast<long>(v);
  }
  std::string text() const {
    if (!node_.IsScalar()) fail("expected a string");
    return node_.Scalar();
  }
  bool boolean() const {
    if (!node_.IsScalar()) fail("expected true or false");
    try {
      return node_.as<bool>();
    } catch (const YAML::Exception&) {
      fail(fmt::format("expected true or false, got '{}'", node_.Scalar()));
    }
  }

  Point2 point2() const {
    expect_seq();
    if (size() != 2) fail("expected [x, y]");
    return {at(0).number(), at(1).number()};
  }
  Point3 point3() const {
    expect_seq();
    if (size() != 3) fail("expected [x, y, z]");
    return {at(0).number(), at(1).number(), at(2).number()};
  }
  Rect rect() const {
    expect_seq();
    if (size() != 4) fail("expected [x_min, y_min, x_max, y_max]");
    const Rect r{at(0).number(), at(1).number(), at(2).number(), at(3).number()};
    if (!(r.x_max > r.x_min) || !(r.y_max > r.y_min)) fail("rectangle has no area");
    return r;
  }

 private:
  YAML::Node node_;
  std::string path_;
  int line_ = 0;
};

// Runs fn and re-labels library validation errors with the field path.
template <class Fn>
auto guarded(const Field& f, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    f.fail(e.what());
  }
}

Polygon parse_region_shape(const Field& f) {
  const Field rect = f.child("rect");
  const Field poly = f.child("polygon");
  if (rect.present() == poly.present()) f.fail("give exactly one of 'rect' or 'polygon'");
  if (rect.present()) return Polygon::from_rect(rect.rect());
  poly.expect_seq();
  std::vector<Point2> v;
  for (std::size_t k = 0; k < poly.size(); ++k) v.push_back(poly.at(k).point2());
  return guarded(poly, [&] { return Polygon(std::move(v)); });
}

FactoryLayout parse_layout(const Field& f) {
  f.expect_map({"halls", "tx", "rx_height_m", "visibility", "blocking"});
  FactoryLayout::Params p;

  const Field halls = f.required("halls");
  halls.expect_seq();
  for (std::size_t k = 0; k < halls.size(); ++k) {
    const Field h = halls.at(k);
    h.expect_map({"name", "rect", "clutter"});
    Hall hall;
    hall.name = h.required("name").text();
    hall.rect = h.required("rect").rect();
    const Field clutter = h.child("clutter");
    if (clutter.present()) {
      const auto c = clutter.text();
      if (c == "sparse") {
        hall.clutter = Clutter::sparse;
      } else if (c == "dense") {
        hall.clutter = Clutter::dense;
      } else {
        clutter.fail("expected 'sparse' or 'dense'");
      }
    }
    p.halls.push_back(std::move(hall));
  }

  const Field tx = f.required("tx");
  tx.expect_map({"position", "heading_deg"});
  p.tx_position = tx.required("position").point3();
  p.tx_heading_deg = tx.number_or("heading_deg", 0.0);
  p.rx_height = f.positive_or("rx_height_m", 1.5);

  const Field vis = f.child("visibility");
  if (vis.present()) {
    vis.expect_seq();
    for (std::size_t k = 0; k < vis.size(); ++k) {
      const Field r = vis.at(k);
      r.expect_map({"name", "rect", "polygon", "tag"});
      VisibilityRegion region;
      region.name = r.required("name").text();
      region.polygon = parse_region_shape(r);
      const Field tag = r.required("tag");
      const auto t = tag.text();
      if (t == "LoS" || t == "los") {
        region.tag = Visibility::LoS;
      } else if (t == "NLoS" || t == "nlos") {
        region.tag = Visibility::NLoS;
      } else {
        tag.fail("expected 'LoS' or 'NLoS'");
      }
      p.visibility_regions.push_back(std::move(region));
    }
  }

  const Field blocking = f.child("blocking");
  if (blocking.present()) {
    blocking.expect_seq();
    for (std::size_t k = 0; k < blocking.size(); ++k) {
      const Field r = blocking.at(k);
      r.expect_map({"name", "rect", "polygon", "excess_loss_db"});
      BlockingRegion region;
      region.name = r.required("name").text();
      region.polygon = parse_region_shape(r);
      region.excess_loss_db = r.number_or("excess_loss_db", region.excess_loss_db);
      if (region.excess_loss_db < 0.0) r.child("excess_loss_db").fail("must be >= 0");
      p.blocking_regions.push_back(std::move(region));
    }
  }

  return guarded(f, [&] { return FactoryLayout(std::move(p)); });
}

BeamGridConfig parse_beams(const Field& f) {
  f.expect_map({"config", "hpbw_az_deg", "hpbw_el_deg", "peak_gain_dbi", "floor_db", "rows", "enabled"});
  const Field cfg_field = f.required("config");
  const TxConfig which = guarded(cfg_field, [&] { return parse_tx_config(cfg_field.text()); });
  PatternDefaults d;
  d.hpbw_az = f.number_or("hpbw_az_deg", d.hpbw_az);
  d.hpbw_el = f.number_or("hpbw_el_deg", d.hpbw_el);
  d.peak_gain = f.number_or("peak_gain_dbi", d.peak_gain);
  d.floor_db = f.positive_or("floor_db", d.floor_db);
  BeamGridConfig cfg = guarded(f, [&] { return make_config(which, d); });

  const Field rows = f.child("rows");
  if (rows.present()) {
    rows.expect_seq();
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Field r = rows.at(k);
      r.expect_map({"row", "hpbw_az_deg", "hpbw_el_deg", "peak_gain_dbi"});
      const Field row_field = r.required("row");
      const long row = row_field.integer();
      if (row < 1 || row > static_cast<long>(cfg.row_counts.size())) {
        row_field.fail(fmt::format("row must be in [1, {}]", cfg.row_counts.size()));
      }
      for (auto& b : cfg.beams) {
        if (b.id.row != row) continue;
        b.hpbw_az = r.number_or("hpbw_az_deg", b.hpbw_az);
        b.hpbw_el = r.number_or("hpbw_el_deg", b.hpbw_el);
        b.peak_gain = r.number_or("peak_gain_dbi", b.peak_gain);
        guarded(r, [&] {
          validate_beam(b);
          return 0;
        });
      }
    }
  }

  const Field enabled = f.child("enabled");
  if (enabled.present()) {
    enabled.expect_seq();
    std::vector<SsbId> ids;
    for (std::size_t k = 0; k < enabled.size(); ++k) {
      const Field e = enabled.at(k);
      const SsbId id = guarded(e, [&] { return parse_ssb_id(e.text()); });
      if (id.config != which) e.fail("beam belongs to the other configuration");
      ids.push_back(id);
    }
    if (ids.empty()) enabled.fail("at least one beam must be enabled");
    cfg = guarded(enabled, [&] { return cfg.restricted_to(ids); });
  }
  return cfg;
}

std::pair<PathGainModel, std::string> parse_model(const Field& f) {
  if (f.node().IsScalar()) {
    const auto name = f.text();
    const ModelPreset p = guarded(f, [&] { return parse_preset(name); });
    return {preset_model(p), name};
  }
  f.expect_map({"pg_1m_db", "n", "sigma_db"});
  PathGainModel m{f.required("pg_1m_db").number(), f.required("n").number(),
                  f.required("sigma_db").number()};
  guarded(f, [&] {
    m.validate();
    return 0;
  });
  return {m, "custom"};
}

LinkBudget parse_link(const Field& f) {
  f.expect_map({"p_c_dbm", "carrier_bandwidth_hz", "scs_hz", "n_rb", "g_rx_dbi", "carrier_freq_hz",
                "noise_floor_dbm"});
  LinkBudget b;
  b.p_c = f.number_or("p_c_dbm", b.p_c);
  b.carrier_bandwidth = f.positive_or("carrier_bandwidth_hz", b.carrier_bandwidth);
  b.scs = f.positive_or("scs_hz", b.scs);
  if (f.child("n_rb").present()) b.n_rb = static_cast<int>(f.child("n_rb").integer());
  b.g_rx = f.number_or("g_rx_dbi", b.g_rx);
  b.carrier_freq = f.positive_or("carrier_freq_hz", b.carrier_freq);
  b.noise_floor = f.number_or("noise_floor_dbm", b.noise_floor);
  guarded(f, [&] {
    b.validate();
    return 0;
  });
  return b;
}

SsbTiming parse_timing(const Field& f) {
  f.expect_map({"burst_periodicity_s", "burst_duration_s", "symbol_duration_s"});
  SsbTiming t;
  t.burst_periodicity = f.positive_or("burst_periodicity_s", t.burst_periodicity);
  t.burst_duration = f.positive_or("burst_duration_s", t.burst_duration);
  t.symbol_duration = f.positive_or("symbol_duration_s", t.symbol_duration);
  guarded(f, [&] {
    t.validate();
    return 0;
  });
  return t;
}

RouteSpec parse_route(const Field& f) {
  f.expect_map({"name", "waypoints", "lawnmower", "speed_mps", "sample_period_s"});
  RouteSpec r;
  r.name = f.required("name").text();
  const Field wp = f.child("waypoints");
  const Field mow = f.child("lawnmower");
  if (wp.present() == mow.present()) f.fail("give exactly one of 'waypoints' or 'lawnmower'");
  if (wp.present()) {
    wp.expect_seq();
    for (std::size_t k = 0; k < wp.size(); ++k) r.waypoints.push_back(wp.at(k).point2());
  } else {
    mow.expect_map({"rect", "spacing_m", "axis"});
    const Rect rect = mow.required("rect").rect();
    const double spacing = mow.positive_or("spacing_m", 2.0);
    char axis = 'x';
    const Field axis_field = mow.child("axis");
    if (axis_field.present()) {
      const auto a = axis_field.text();
      if (a != "x" && a != "y") axis_field.fail("expected 'x' or 'y'");
      axis = a[0];
    }
    r.waypoints = lawnmower_waypoints(rect, spacing, axis);
  }
  const Field speed = f.child("speed_mps");
  if (speed.present()) {
    r.speed = speed.number();
    if (!(r.speed > 0.0)) speed.fail("speed must be > 0");
    if (r.speed > RouteSpec::kMaxSpeed) {
      speed.fail(fmt::format("speed exceeds the platform maximum of {} m/s", RouteSpec::kMaxSpeed));
    }
  }
  r.sample_period = f.positive_or("sample_period_s", r.sample_period);
  guarded(f, [&] {
    r.validate();
    return 0;
  });
  return r;
}

AnalysisSettings parse_analysis(const Field& f) {
  f.expect_map({"grid_m", "threshold_dbm", "distance_bins_m"});
  AnalysisSettings a;
  const Field grid = f.child("grid_m");
  if (grid.present()) {
    const Point2 g = grid.point2();
    if (!(g.x > 0.0) || !(g.y > 0.0)) grid.fail("cell sizes must be > 0");
    a.cell_dx = g.x;
    a.cell_dy = g.y;
  }
  a.threshold_dbm = f.number_or("threshold_dbm", a.threshold_dbm);
  const Field bins = f.child("distance_bins_m");
  if (bins.present()) {
    bins.expect_seq();
    if (bins.size() < 2) bins.fail("need at least two bin edges");
    double prev = bins.at(0).number();
    for (std::size_t k = 1; k < bins.size(); ++k) {
      const double edge = bins.at(k).number();
      if (!(edge > prev)) bins.at(k).fail("bin edges must increase");
      a.distance_bins.push_back({prev, edge});
      prev = edge;
    }
  }
  return a;
}

}  // namespace

std::vector<Point2> lawnmower_waypoints(const Rect& r, double spacing, char axis) {
  if (!(spacing > 0.0)) throw InvalidArgument("lawnmower spacing must be > 0");
  if (axis != 'x' && axis != 'y') throw InvalidArgument("lawnmower axis must be 'x' or 'y'");
  const double across = axis == 'x' ? r.height() : r.width();
  const double lo = axis == 'x' ? r.y_min : r.x_min;
  const double start = axis == 'x' ? r.x_min : r.y_min;
  const double stop = axis == 'x' ? r.x_max : r.y_max;
  std::vector<Point2> out;
  bool forward = true;
  for (double off = spacing / 2.0; off <= across + 1e-9; off += spacing) {
    const double c = lo + std::min(off, across);
    const double a = forward ? start : stop;
    const double b = forward ? stop : start;
    if (axis == 'x') {
      out.push_back({a, c});
      out.push_back({b, c});
    } else {
      out.push_back({c, a});
      out.push_back({c, b});
    }
    forward = !forward;
  }
  if (out.empty()) {
    const double c = lo + across / 2.0;
    out = axis == 'x' ? std::vector<Point2>{{start, c}, {stop, c}} : std::vector<Point2>{{c, start}, {c, stop}};
  }
  return out;
}

Scenario parse_scenario(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("line {}", e.mark.line + 1), e.msg);
  }
  const Field top(root, "", 0);
  if (!root.IsMap()) throw ConfigError("", "scenario must be a mapping");
  top.expect_map({"name", "seed", "workers", "layout", "beams", "propagation", "shadowing",
                  "fading_sigma_db", "link", "timing", "routes", "analysis", "output"});

  FactoryLayout layout = parse_layout(top.required("layout"));
  BeamGridConfig beams = parse_beams(top.required("beams"));

  const Field prop = top.required("propagation");
  prop.expect_map({"los", "nlos"});
  auto [los, los_name] = parse_model(prop.required("los"));
  auto [nlos, nlos_name] = parse_model(prop.required("nlos"));

  Scenario s{
      .name = top.child("name").present() ? top.child("name").text() : "scenario",
      .layout = std::move(layout),
      .beams = std::move(beams),
      .model_los = los,
      .model_nlos = nlos,
      .model_name = los_name + "/" + nlos_name,
      .budget = {},
      .timing = {},
      .shadowing = {},
      .routes = {},
      .analysis = {},
      .output_dir = {},
  };

  const Field link = top.child("link");
  if (link.present()) s.budget = parse_link(link);
  const Field timing = top.child("timing");
  if (timing.present()) s.timing = parse_timing(timing);

  const Field sh = top.child("shadowing");
  if (sh.present()) {
    sh.expect_map({"enabled", "decorrelation_m", "spacing_m"});
    if (sh.child("enabled").present()) s.shadowing.enabled = sh.child("enabled").boolean();
    s.shadowing.decorrelation_m = sh.positive_or("decorrelation_m", s.shadowing.decorrelation_m);
    s.shadowing.spacing_m = sh.positive_or("spacing_m", s.shadowing.spacing_m);
  }
  const Field fading = top.child("fading_sigma_db");
  if (fading.present()) {
    s.fading_sigma_db = fading.number();
    if (s.fading_sigma_db < 0.0) fading.fail("must be >= 0");
  }

  const Field routes = top.required("routes");
  routes.expect_seq();
  if (routes.size() == 0) routes.fail("at least one route is required");
  for (std::size_t k = 0; k < routes.size(); ++k) s.routes.push_back(parse_route(routes.at(k)));

  const Field analysis = top.child("analysis");
  if (analysis.present()) s.analysis = parse_analysis(analysis);
  if (top.child("seed").present()) s.seed = top.child("seed").u64();
  const Field workers = top.child("workers");
  if (workers.present()) {
    const long w = workers.integer();
    if (w < 1) workers.fail("must be >= 1");
    s.workers = static_cast<unsigned>(w);
  }
  if (top.child("output").present()) s.output_dir = top.child("output").text();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.where(),
                      std::string(e.what()).substr(e.where().empty() ? 0 : e.where().size() + 2));
  }
}

ShadowingField Scenario::shadowing_field(std::uint64_t field_seed) const {
  return ShadowingField::covering(layout.bounds(), 1.0, shadowing.decorrelation_m, field_seed,
                                  shadowing.spacing_m);
}

GridSpec Scenario::analysis_grid() const { return analysis_grid(analysis.cell_dx, analysis.cell_dy); }

GridSpec Scenario::analysis_grid(double cell_dx, double cell_dy) const {
  return GridSpec::covering(layout.bounds(), cell_dx, cell_dy);
}

std::vector<DistanceBin> Scenario::distance_bins() const {
  if (!analysis.distance_bins.empty()) return analysis.distance_bins;
  const Rect b = layout.bounds();
  const Point3 tx = layout.tx_position();
  double far = 0.0;
  for (const Point2 c : {Point2{b.x_min, b.y_min}, Point2{b.x_max, b.y_min}, Point2{b.x_min, b.y_max},
                         Point2{b.x_max, b.y_max}}) {
    far = std::max(far, std::hypot(c.x - tx.x, c.y - tx.y, layout.rx_height() - tx.z));
  }
  std::vector<DistanceBin> bins;
  for (double lo = 0.0; lo < far; lo += 5.0) bins.push_back({lo, lo + 5.0});
  return bins;
}

MeasurementTrace simulate(const Scenario& scenario, std::optional<std::uint64_t> seed,
                          std::optional<unsigned> workers) {
  const std::uint64_t s = seed.value_or(scenario.seed);
  PathGainModel los = scenario.model_los;
  PathGainModel nlos = scenario.model_nlos;
  if (!scenario.shadowing.enabled) {
    los.sigma = 0.0;
    nlos.sigma = 0.0;
  }
  const ShadowingField field = scenario.shadowing_field(s);
  const SceneView scene{scenario.layout, scenario.beams, los, nlos, field, scenario.budget};
  CampaignOptions opt;
  opt.seed = s;
  opt.fading_sigma = scenario.fading_sigma_db;
  opt.workers = workers.value_or(scenario.workers);
  opt.model_name = scenario.model_name;
  return run_campaign(scene, scenario.routes, scenario.timing, opt);
}

}  // namespace beamfactory
