#ifndef SILA_GEOMETRY_HPP
#define SILA_GEOMETRY_HPP

#include <cmath>

namespace sila {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace sila

#endif
