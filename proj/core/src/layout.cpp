#include "beamfactory/layout.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "beamfactory/errors.hpp"

namespace beamfactory {

std::string_view to_string(Clutter c) { return c == Clutter::sparse ? "sparse" : "dense"; }
std::string_view to_string(Visibility v) { return v == Visibility::LoS ? "LoS" : "NLoS"; }

namespace {

constexpr double kCoverageProbeStep = 0.5;

void check_visibility_partition(const FactoryLayout::Params& p) {
  // Probe cell centers of a half-meter lattice in every hall: each probe must
  // fall in exactly one visibility region. Centers stay off shared edges.
  for (const auto& hall : p.halls) {
    const auto nx = static_cast<std::size_t>(std::ceil(hall.rect.width() / kCoverageProbeStep));
    const auto ny = static_cast<std::size_t>(std::ceil(hall.rect.height() / kCoverageProbeStep));
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) {
        const Point2 probe{
            std::min(hall.rect.x_min + (i + 0.5) * kCoverageProbeStep, hall.rect.x_max),
            std::min(hall.rect.y_min + (j + 0.5) * kCoverageProbeStep, hall.rect.y_max)};
        const auto hits = std::count_if(p.visibility_regions.begin(), p.visibility_regions.end(),
                                        [&](const auto& r) { return r.polygon.contains(probe); });
        if (hits != 1) {
          throw InvalidArgument(fmt::format(
              "hall '{}': point ({:.2f}, {:.2f}) is covered by {} visibility regions, expected 1",
              hall.name, probe.x, probe.y, hits));
        }
      }
    }
  }
}

}  // namespace

FactoryLayout::FactoryLayout(Params params) : p_(std::move(params)) {
  if (p_.halls.empty()) throw InvalidArgument("layout needs at least one hall");
  for (const auto& h : p_.halls) {
    if (!(h.rect.width() > 0.0) || !(h.rect.height() > 0.0)) {
      throw InvalidArgument(fmt::format("hall '{}' is degenerate", h.name));
    }
  }
  if (!(p_.rx_height > 0.0)) throw InvalidArgument("rx_height must be > 0");
  if (!std::isfinite(p_.tx_position.z)) throw InvalidArgument("tx height must be finite");
  if (!contains(tx_foot())) throw InvalidArgument("tx_position must lie within a hall");
  for (const auto& b : p_.blocking_regions) {
    if (!(b.excess_loss_db >= 0.0)) {
      throw InvalidArgument(fmt::format("blocking region '{}' has negative excess loss", b.name));
    }
  }
  check_visibility_partition(p_);
}

bool FactoryLayout::contains(Point2 p) const {
  return std::any_of(p_.halls.begin(), p_.halls.end(),
                     [&](const Hall& h) { return h.rect.contains(p); });
}

Rect FactoryLayout::bounds() const {
  Rect r = p_.halls.front().rect;
  for (const auto& h : p_.halls) {
    r.x_min = std::min(r.x_min, h.rect.x_min);
    r.y_min = std::min(r.y_min, h.rect.y_min);
    r.x_max = std::max(r.x_max, h.rect.x_max);
    r.y_max = std::max(r.y_max, h.rect.y_max);
  }
  return r;
}

Visibility FactoryLayout::classify_visibility(Point2 p) const {
  if (!contains(p)) {
    throw OutOfLayoutError(fmt::format("point ({:.3f}, {:.3f}) is outside every hall", p.x, p.y));
  }
  for (const auto& b : p_.blocking_regions) {
    if (b.polygon.contains(p)) return Visibility::NLoS;
  }
  // On a shared edge the first listed region wins.
  for (const auto& r : p_.visibility_regions) {
    if (r.polygon.contains(p)) return r.tag;
  }
  throw OutOfLayoutError(
      fmt::format("point ({:.3f}, {:.3f}) is not covered by a visibility region", p.x, p.y));
}

double FactoryLayout::blocking_loss_db(Point2 p) const {
  double loss = 0.0;
  for (const auto& b : p_.blocking_regions) {
    if (b.polygon.contains(p)) loss += b.excess_loss_db;
  }
  return loss;
}

TxAngles FactoryLayout::angles_to_tx(Point2 p) const {
  if (!contains(p)) {
    throw OutOfLayoutError(fmt::format("point ({:.3f}, {:.3f}) is outside every hall", p.x, p.y));
  }
  const double dx = p.x - p_.tx_position.x;
  const double dy = p.y - p_.tx_position.y;
  const double dz = p_.tx_position.z - p_.rx_height;
  const double horizontal = std::hypot(dx, dy);
  if (horizontal == 0.0 && dz == 0.0) {
    throw DomainError("receiver coincides with the transmitter; angles are undefined");
  }
  TxAngles a;
  a.distance_3d = std::hypot(horizontal, dz);
  a.downtilt_deg = rad_to_deg(std::atan2(dz, horizontal));
  a.azimuth_deg = horizontal == 0.0
                      ? 0.0
                      : wrap_degrees(rad_to_deg(std::atan2(dy, dx)) - p_.tx_heading_deg);
  return a;
}

FactoryLayout FactoryLayout::default_factory() {
  Params p;
  const Rect sparse{0.0, 10.0, 15.0, 50.0};
  const Rect dense{15.0, 0.0, 40.0, 30.0};
  p.halls = {{"sparse", sparse, Clutter::sparse}, {"dense", dense, Clutter::dense}};
  p.tx_position = {0.5, 30.0, 3.0};
  p.tx_heading_deg = 0.0;
  p.rx_height = 1.5;
  p.visibility_regions = {{"sparse-los", Polygon::from_rect(sparse), Visibility::LoS},
                          {"dense-nlos", Polygon::from_rect(dense), Visibility::NLoS}};
  p.blocking_regions = {{"pallet-rack", Polygon::from_rect({15.0, 0.0, 40.0, 3.0}), 15.0}};
  return FactoryLayout(std::move(p));
}

// --- GridSpec ---------------------------------------------------------------

GridSpec::GridSpec(Point2 origin, double cell_dx, double cell_dy, std::size_t nx, std::size_t ny)
    : origin_(origin), dx_(cell_dx), dy_(cell_dy), nx_(nx), ny_(ny) {
  if (!(dx_ > 0.0) || !(dy_ > 0.0)) throw InvalidArgument("grid cell sizes must be > 0");
  if (nx_ < 1 || ny_ < 1) throw InvalidArgument("grid needs at least one cell per axis");
}

GridSpec GridSpec::covering(const Rect& r, double cell_dx, double cell_dy) {
  if (!(cell_dx > 0.0) || !(cell_dy > 0.0)) throw InvalidArgument("grid cell sizes must be > 0");
  const auto nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(r.width() / cell_dx - 1e-9)));
  const auto ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(r.height() / cell_dy - 1e-9)));
  return GridSpec({r.x_min, r.y_min}, cell_dx, cell_dy, nx, ny);
}

Rect GridSpec::extent() const {
  return {origin_.x, origin_.y, origin_.x + static_cast<double>(nx_) * dx_,
          origin_.y + static_cast<double>(ny_) * dy_};
}

bool GridSpec::contains(Point2 p) const { return extent().contains(p); }

std::optional<GridIndex> GridSpec::try_index_of(Point2 p) const {
  if (!contains(p)) return std::nullopt;
  const auto bin = [](double v, double o, double d, std::size_t n) {
    auto k = static_cast<std::size_t>(std::floor((v - o) / d));
    return std::min(k, n - 1);
  };
  return GridIndex{bin(p.x, origin_.x, dx_, nx_), bin(p.y, origin_.y, dy_, ny_)};
}

GridIndex GridSpec::index_of(Point2 p) const {
  auto g = try_index_of(p);
  if (!g) {
    throw OutOfGridError(fmt::format("point ({:.3f}, {:.3f}) is outside the grid extent", p.x, p.y));
  }
  return *g;
}

Point2 GridSpec::cell_center(GridIndex g) const {
  return {origin_.x + (static_cast<double>(g.i) + 0.5) * dx_,
          origin_.y + (static_cast<double>(g.j) + 0.5) * dy_};
}

// --- Routes ------------------------------------------------------------------

void RouteSpec::validate() const {
  if (waypoints.size() < 2) throw InvalidArgument("route needs at least 2 waypoints");
  if (!(speed > 0.0) || speed > kMaxSpeed) {
    throw InvalidArgument(fmt::format("route speed {} m/s outside (0, {}]", speed, kMaxSpeed));
  }
  if (!(sample_period > 0.0)) throw InvalidArgument("route sample_period must be > 0");
}

double RouteSpec::length() const {
  double total = 0.0;
  for (std::size_t k = 1; k < waypoints.size(); ++k) total += distance(waypoints[k - 1], waypoints[k]);
  return total;
}

std::vector<RouteSample> sample_route(const RouteSpec& route) {
  route.validate();

  std::vector<Point2> pts;
  for (const auto& w : route.waypoints) {
    if (pts.empty() || !(pts.back() == w)) pts.push_back(w);
  }
  if (pts.size() == 1) return {{0.0, pts.front(), 0.0}};

  std::vector<double> cumulative(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k) {
    cumulative[k] = cumulative[k - 1] + distance(pts[k - 1], pts[k]);
  }
  const double total = cumulative.back();
  const double duration = total / route.speed;
  const double tol = 1e-9 * std::max(1.0, duration);

  std::vector<RouteSample> out;
  const auto n_steps = static_cast<std::size_t>(std::floor(duration / route.sample_period + 1e-9));
  out.reserve(n_steps + 2);
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * route.sample_period;
    if (std::abs(t - duration) <= tol) break;  // final waypoint appended below
    const double s = route.speed * t;
    while (seg + 2 < pts.size() && cumulative[seg + 1] <= s) ++seg;
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const double frac = (s - cumulative[seg]) / seg_len;
    out.push_back({t, pts[seg] + frac * (pts[seg + 1] - pts[seg]), s});
  }
  out.push_back({duration, pts.back(), total});
  return out;
}

}  // namespace beamfactory
