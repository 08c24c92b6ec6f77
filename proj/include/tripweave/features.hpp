#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tripweave/matrix.hpp"
#include "tripweave/region.hpp"
#include "tripweave/simulator.hpp"
#include "tripweave/trip.hpp"

namespace tripweave {

inline constexpr int kTimeBins = 8;  // three-hour intervals over the day
inline constexpr double kWaitHoursPerTrip = 0.25;

struct RouteMetrics {
  size_t n_trips = 0;
  double income_usd = 0;
  double fares_usd = 0;
  double driving_hours = 0;
  double est_hours = 0;  // driving_hours + 0.25 per trip
  double e_per_trip = 0;
  double e_per_drive_hr = 0;
  double est_e_per_hr = 0;
  bool rates_defined = false;  // false when driving_hours == 0
};

inline double estimated_hourly_rate(double income_usd, double driving_hours, double n_trips) {
  return income_usd / (driving_hours + kWaitHoursPerTrip * n_trips);
}

RouteMetrics route_metrics(const DriverRoute& route, std::span<const TripRecord> trips);

struct FeatureOptions {
  bool include_dropoff_regions = false;
};

// n_trips, mean fare/tip/total/distance, driving hours, 8 start-time bins,
// pickup region shares (dropoff shares appended when enabled).
std::vector<std::string> feature_names(const RegionMap& region_map, const FeatureOptions& options = {});

// Unknown-region trips are excluded and shares renormalized; a route whose
// endpoints are all Unknown yields nullopt and is dropped from clustering.
std::optional<std::vector<double>> route_features(const DriverRoute& route,
                                                  std::span<const TripRecord> trips,
                                                  const RegionMap& region_map,
                                                  const FeatureOptions& options = {});

struct FeatureMatrix {
  std::vector<std::string> names;
  Matrix values;
  std::vector<uint32_t> route_ids;  // driver_id per row
  uint64_t rejected_all_unknown = 0;
};

FeatureMatrix feature_matrix(std::span<const DriverRoute> routes, std::span<const TripRecord> trips,
                             const RegionMap& region_map, const FeatureOptions& options = {});

// Keeps routes with n_trips strictly greater than min_trips; order-preserving.
std::vector<DriverRoute> filter_active(std::vector<DriverRoute> routes, int min_trips = 2);

struct Standardization {
  std::vector<double> mean;
  std::vector<double> sd;               // recorded as 1 for flagged columns
  std::vector<uint8_t> zero_variance;   // flag per column

  std::vector<double> apply(std::span<const double> row) const;
  std::vector<double> invert(std::span<const double> row) const;
};

// Column-wise z-score with population standard deviation.
std::pair<Matrix, Standardization> standardize(const Matrix& input);

}  // namespace tripweave
