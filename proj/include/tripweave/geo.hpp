#pragma once

namespace tripweave {

inline constexpr double kEarthRadiusMiles = 3958.8;
inline constexpr double kMilesPerDegreeLat = 69.09398113448533;  // pi * R / 180

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

// Great-circle distance in miles; exactly symmetric, zero iff coordinates are equal.
double haversine_miles(const GeoPoint& a, const GeoPoint& b);

}  // namespace tripweave
