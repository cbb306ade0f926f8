#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace beamfactory {

// Layout coordinates: x east, y north, meters.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Wraps an angle difference into (-180, 180].
double wrap_degrees(double deg);

struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  // Closed-set containment.
  bool contains(Point2 p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

// Simple polygon, vertices in order (either winding). Containment is closed:
// points on an edge count as inside.
class Polygon {
 public:
  Polygon() = default;
  explicit Polygon(std::vector<Point2> vertices);
  static Polygon from_rect(const Rect& r);

  const std::vector<Point2>& vertices() const { return vertices_; }
  bool contains(Point2 p) const;
  Rect bounds() const;
  double area() const;

 private:
  std::vector<Point2> vertices_;
};

}  // namespace beamfactory
