#pragma once

#include <cmath>

namespace cirsense {

/// Planar point in meters.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Shortest distance from `p` to the closed segment [a, b].
double segment_point_distance(Point a, Point b, Point p);

inline constexpr double kSpeedOfLight = 299'792'458.0;

}  // namespace cirsense
