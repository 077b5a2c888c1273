#include "cirsense/geometry.hpp"

#include <algorithm>

namespace cirsense {

double segment_point_distance(Point a, Point b, Point p) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(a, p);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(a + t * ab, p);
}

}  // namespace cirsense
