#include "contextkg/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace ckg {

Polygon convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

Polygon regular_polygon(Point center, double radius, int sides) {
  Polygon out;
  out.reserve(static_cast<std::size_t>(sides));
  for (int i = 0; i < sides; ++i) {
    const double a = 2.0 * std::numbers::pi * i / sides;
    out.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return out;
}

Polygon offset_convex(const Polygon& hull, double dist, double arc_step) {
  const std::size_t n = hull.size();
  if (n == 0) return {};
  if (n == 1) {
    const int sides = std::max(3, static_cast<int>(std::ceil(2.0 * std::numbers::pi / arc_step)));
    return regular_polygon(hull[0], dist, sides);
  }
  auto outward_normal_angle = [&](std::size_t i) {
    const Point a = hull[i];
    const Point b = hull[(i + 1) % n];
    // For a counter-clockwise polygon the outward normal is the edge direction rotated by -90 degrees.
    return std::atan2(-(b.x - a.x), b.y - a.y);
  };
  Polygon out;
  for (std::size_t i = 0; i < n; ++i) {
    const double a0 = outward_normal_angle((i + n - 1) % n);
    double a1 = outward_normal_angle(i);
    while (a1 < a0) a1 += 2.0 * std::numbers::pi;
    const int steps = std::max(1, static_cast<int>(std::ceil((a1 - a0) / arc_step)));
    for (int s = 0; s <= steps; ++s) {
      const double a = a0 + (a1 - a0) * s / steps;
      out.push_back({hull[i].x + dist * std::cos(a), hull[i].y + dist * std::sin(a)});
    }
  }
  return out;
}

bool point_in_polygon(Point p, std::span<const Point> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = poly[i];
    const Point b = poly[j];
    // On-edge check: collinear and within the segment's bounding box.
    if (std::abs(cross(a, b, p)) <= 1e-12 * std::max(1.0, distance(a, b)) &&
        p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) && p.y >= std::min(a.y, b.y) &&
        p.y <= std::max(a.y, b.y)) {
      return false;
    }
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

bool is_convex_ccw(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) < -1e-9) return false;
  }
  return true;
}

Point clamp_to_disc(Point p, Point center, double radius) {
  const Point d = p - center;
  const double len = d.norm();
  if (len <= radius) return p;
  return center + d * (radius / len);
}

}  // namespace ckg
