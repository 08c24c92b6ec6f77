#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tripweave/geo.hpp"

namespace tripweave {

// Index of a trip within the in-memory dataset it came from. Opaque string
// trip ids exist only at the file boundary.
using TripIdx = uint32_t;

struct TripRecord {
  std::string trip_id;
  int64_t start_ts = 0;  // civil seconds
  int64_t end_ts = 0;
  int64_t duration_s = 0;
  double distance_mi = 0.0;
  std::optional<int> pickup_area;   // 1..77
  std::optional<int> dropoff_area;  // 1..77
  std::optional<GeoPoint> pickup_centroid;
  std::optional<GeoPoint> dropoff_centroid;
  int64_t fare_cents = 0;
  int64_t tip_cents = 0;
  int64_t extras_cents = 0;
  int64_t total_cents = 0;

  bool operator==(const TripRecord&) const = default;

  double driving_hours() const { return static_cast<double>(duration_s) / 3600.0; }
};

}  // namespace tripweave
