#include "beamfactory/geometry.hpp"

#include <algorithm>

#include "beamfactory/errors.hpp"

namespace beamfactory {

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

Polygon::Polygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) throw InvalidArgument("polygon needs at least 3 vertices");
}

Polygon Polygon::from_rect(const Rect& r) {
  return Polygon({{r.x_min, r.y_min}, {r.x_max, r.y_min}, {r.x_max, r.y_max}, {r.x_min, r.y_max}});
}

namespace {

bool on_segment(Point2 p, Point2 a, Point2 b) {
  constexpr double kTol = 1e-12;
  const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  const double scale = std::max({1.0, std::abs(b.x - a.x), std::abs(b.y - a.y)});
  if (std::abs(cross) > kTol * scale * scale) return false;
  return p.x >= std::min(a.x, b.x) - kTol && p.x <= std::max(a.x, b.x) + kTol &&
         p.y >= std::min(a.y, b.y) - kTol && p.y <= std::max(a.y, b.y) + kTol;
}

}  // namespace

bool Polygon::contains(Point2 p) const {
  const std::size_t n = vertices_.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = vertices_[i];
    const Point2 b = vertices_[j];
    if (on_segment(p, a, b)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

Rect Polygon::bounds() const {
  Rect r{vertices_.front().x, vertices_.front().y, vertices_.front().x, vertices_.front().y};
  for (const auto& v : vertices_) {
    r.x_min = std::min(r.x_min, v.x);
    r.y_min = std::min(r.y_min, v.y);
    r.x_max = std::max(r.x_max, v.x);
    r.y_max = std::max(r.y_max, v.y);
  }
  return r;
}

double Polygon::area() const {
  double twice = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    twice += vertices_[j].x * vertices_[i].y - vertices_[i].x * vertices_[j].y;
  }
  return std::abs(twice) / 2.0;
}

}  // namespace beamfactory
