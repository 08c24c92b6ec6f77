#include "tripweave/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tripweave {

double haversine_miles(const GeoPoint& a, const GeoPoint& b) {
  if (a.lat == b.lat && a.lon == b.lon) return 0.0;
  constexpr double rad = std::numbers::pi / 180.0;
  const double dphi = (b.lat - a.lat) * rad;
  const double dlam = (b.lon - a.lon) * rad;
  const double s1 = std::sin(dphi * 0.5);
  const double s2 = std::sin(dlam * 0.5);
  const double h = s1 * s1 + std::cos(a.lat * rad) * std::cos(b.lat * rad) * s2 * s2;
  return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace tripweave
