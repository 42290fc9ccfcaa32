#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace ckg {

struct Point {
  double x = 0.0;
  double y = 0.0;

  Point& operator+=(Point o) { x += o.x; y += o.y; return *this; }
  Point& operator-=(Point o) { x -= o.x; y -= o.y; return *this; }
  Point& operator*=(double s) { x *= s; y *= s; return *this; }
  friend Point operator+(Point a, Point b) { return a += b; }
  friend Point operator-(Point a, Point b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend bool operator==(Point, Point) = default;

  double norm() const { return std::hypot(x, y); }
};

inline double distance(Point a, Point b) { return (a - b).norm(); }
inline double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

using Polygon = std::vector<Point>;

/// Counter-clockwise convex hull (Andrew's monotone chain). Collinear points
/// are dropped; fewer than three distinct points are returned as-is.
Polygon convex_hull(std::vector<Point> points);

/// Regular n-gon of the given circumradius, counter-clockwise from angle 0.
Polygon regular_polygon(Point center, double radius, int sides);

/// Offsets a convex counter-clockwise polygon outward by `distance`, rounding
/// every corner with arc segments of at most `arc_step` radians.
Polygon offset_convex(const Polygon& hull, double distance, double arc_step);

/// Even-odd point-in-polygon; points on the boundary count as outside.
bool point_in_polygon(Point p, std::span<const Point> polygon);

bool is_convex_ccw(std::span<const Point> polygon);

/// Clamps `p` into the disc (center, radius).
Point clamp_to_disc(Point p, Point center, double radius);

}  // namespace ckg
