#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beamfactory/geometry.hpp"

namespace beamfactory {

enum class Clutter { sparse, dense };
enum class Visibility { LoS, NLoS };

std::string_view to_string(Clutter c);
std::string_view to_string(Visibility v);

struct Hall {
  std::string name;
  Rect rect;
  Clutter clutter = Clutter::sparse;
};

struct VisibilityRegion {
  std::string name;
  Polygon polygon;
  Visibility tag = Visibility::LoS;
};

// Full-blockage area (e.g. a pallet rack taller than the transmitter). Points
// inside classify as NLoS and pick up `excess_loss_db` on top of the path gain.
struct BlockingRegion {
  std::string name;
  Polygon polygon;
  double excess_loss_db = 15.0;
};

struct TxAngles {
  double azimuth_deg = 0.0;   // from the panel normal, positive toward north
  double downtilt_deg = 0.0;  // positive below horizontal
  double distance_3d = 0.0;   // meters
};

class FactoryLayout {
 public:
  struct Params {
    std::vector<Hall> halls;
    Point3 tx_position{0.0, 0.0, 3.0};
    // Compass-style heading of the panel normal, degrees counter-clockwise
    // from east. 0 means the panel faces east.
    double tx_heading_deg = 0.0;
    double rx_height = 1.5;
    std::vector<VisibilityRegion> visibility_regions;
    std::vector<BlockingRegion> blocking_regions;
  };

  // Validates every invariant; throws InvalidArgument on violation.
  explicit FactoryLayout(Params params);

  const std::vector<Hall>& halls() const { return p_.halls; }
  const Point3& tx_position() const { return p_.tx_position; }
  Point2 tx_foot() const { return {p_.tx_position.x, p_.tx_position.y}; }
  double tx_heading_deg() const { return p_.tx_heading_deg; }
  double rx_height() const { return p_.rx_height; }
  const std::vector<VisibilityRegion>& visibility_regions() const { return p_.visibility_regions; }
  const std::vector<BlockingRegion>& blocking_regions() const { return p_.blocking_regions; }

  bool contains(Point2 p) const;
  // Bounding box of the hall union.
  Rect bounds() const;

  // Throws OutOfLayoutError outside the hall union.
  Visibility classify_visibility(Point2 p) const;
  // Sum of excess losses of the blocking regions containing p (0 if none).
  double blocking_loss_db(Point2 p) const;
  // Throws OutOfLayoutError outside the halls, DomainError when the receiver
  // sits exactly at the transmitter.
  TxAngles angles_to_tx(Point2 p) const;

  // Bundled two-hall factory approximating the measured lab: a 15 m x 40 m
  // sparse LoS hall with the panel on its west wall and a 25 m x 30 m dense
  // NLoS hall to the south-east. The geometry is approximate.
  static FactoryLayout default_factory();

 private:
  Params p_;
};

struct GridIndex {
  std::size_t i = 0;
  std::size_t j = 0;

  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

// Regular analysis grid. Cell (i, j) covers [x0 + i*dx, x0 + (i+1)*dx) x
// [y0 + j*dy, y0 + (j+1)*dy); the global maximum edges belong to the last cells.
class GridSpec {
 public:
  GridSpec(Point2 origin, double cell_dx, double cell_dy, std::size_t nx, std::size_t ny);

  // Smallest grid anchored at r's lower-left corner that covers r.
  static GridSpec covering(const Rect& r, double cell_dx, double cell_dy);

  Point2 origin() const { return origin_; }
  double cell_dx() const { return dx_; }
  double cell_dy() const { return dy_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }
  Rect extent() const;

  bool contains(Point2 p) const;
  // Throws OutOfGridError outside the extent.
  GridIndex index_of(Point2 p) const;
  std::optional<GridIndex> try_index_of(Point2 p) const;
  std::size_t flat(GridIndex g) const { return g.j * nx_ + g.i; }
  GridIndex unflat(std::size_t k) const { return {k % nx_, k / nx_}; }
  Point2 cell_center(GridIndex g) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  Point2 origin_;
  double dx_;
  double dy_;
  std::size_t nx_;
  std::size_t ny_;
};

struct RouteSpec {
  std::string name;
  std::vector<Point2> waypoints;
  double speed = 1.5;           // m/s, platform maximum 2 m/s
  double sample_period = 0.020;  // s

  static constexpr double kMaxSpeed = 2.0;

  // Throws InvalidArgument when an invariant is broken.
  void validate() const;
  double length() const;
};

struct RouteSample {
  double time = 0.0;
  Point2 position;
  double traveled = 0.0;  // path length from the first waypoint
};

// Constant-speed interpolation along the polyline, one sample every
// sample_period from t = 0; the final waypoint is always the last sample.
std::vector<RouteSample> sample_route(const RouteSpec& route);

}  // namespace beamfactory
