#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tripweave/features.hpp"
#include "tripweave/region.hpp"
#include "tripweave/simulator.hpp"
#include "tripweave/trip.hpp"

namespace tripweave {

// ---- monthly series (costs over time) ----

struct MonthlyRow {
  int year = 0;
  int month = 0;  // 1..12
  uint64_t n_trips = 0;
  double total_usd = 0;
  double total_driving_hours = 0;
  std::optional<double> cost_per_driving_hour;  // ratio of sums; null for empty months
  std::optional<double> cost_mean_of_ratios;    // emitted alongside for transparency
};

struct MonthlySeries {
  std::vector<MonthlyRow> rows;  // contiguous months over the input span
  uint64_t zero_duration_excluded = 0;
};

MonthlySeries monthly_cost_per_hour(std::span<const TripRecord> trips);

struct CpiTable {
  std::map<std::pair<int, int>, double> index;  // (year, month) -> CPI level

  static CpiTable from_csv(const std::filesystem::path& path);  // year,month,cpi
  double at(int year, int month) const;                         // ConfigError if missing
};

// real = nominal * CPI(base) / CPI(month)
MonthlySeries cpi_adjust(const MonthlySeries& series, const CpiTable& cpi, int base_year,
                         int base_month);

// ---- regional tables ----

enum class Endpoint { pickup = 0, dropoff = 1 };
inline constexpr std::array<const char*, 2> kEndpointNames = {"pickup", "dropoff"};

struct RegionShareRow {
  std::string region;
  uint64_t n_trips = 0;
  double share_pct = 0;  // of trips with a known endpoint
};

struct RegionalShares {
  int year = 0;
  std::array<std::vector<RegionShareRow>, 2> by_endpoint;  // rows in region_order
  std::array<uint64_t, 2> unknown_trips = {0, 0};          // reported separately
};

// Throws DataError when no trip of that year has a known endpoint.
RegionalShares regional_distribution(std::span<const TripRecord> trips, const RegionMap& region_map,
                                     int year);

struct RegionRateRow {
  std::string region;
  uint64_t n_trips = 0;
  double total_usd = 0;
  double driving_hours = 0;
  std::optional<double> cost_per_driving_hour;  // null when the region logged zero hours
  std::optional<double> cost_mean_of_ratios;
};

struct RegionalRates {
  int year = 0;
  std::array<std::vector<RegionRateRow>, 2> by_endpoint;
  std::array<uint64_t, 2> unknown_trips = {0, 0};
  uint64_t zero_duration_excluded = 0;
};

RegionalRates regional_cost_per_hour(std::span<const TripRecord> trips, const RegionMap& region_map,
                                     int year);

// ---- per-cluster reporting ----

struct ClusterReportRow {
  int cluster = 0;
  uint64_t members = 0;
  double mean_trips = 0;
  // mean over member routes of the per-route value
  double e_per_trip = 0;
  double e_per_drive_hr = 0;
  double est_e_per_hr = 0;
  double total_fares = 0;
  double total_income = 0;
  // ratio-of-totals variants of the rates
  double e_per_trip_rot = 0;
  double e_per_drive_hr_rot = 0;
  double est_e_per_hr_rot = 0;
  uint64_t rate_excluded_routes = 0;  // zero driving-hour members skipped in rate means
};

std::vector<ClusterReportRow> cluster_report(std::span<const DriverRoute> routes,
                                             std::span<const RouteMetrics> metrics,
                                             std::span<const int> assignments, int k);

// column name -> (cluster with the highest value, cluster with the lowest)
std::map<std::string, std::pair<int, int>> report_markers(std::span<const ClusterReportRow> rows);

struct ClusterProportions {
  int cluster = 0;
  uint64_t trips = 0;  // trips counted (known endpoints only, for regions)
  std::vector<double> shares;
};

// Trip-start shares over the 8 three-hour bins, per cluster, at trip level.
std::vector<ClusterProportions> temporal_proportions(std::span<const DriverRoute> routes,
                                                     std::span<const TripRecord> trips,
                                                     std::span<const int> assignments, int k);

struct RegionalClusterProportions {
  int cluster = 0;
  std::array<ClusterProportions, 2> by_endpoint;       // shares over region_order
  std::array<uint64_t, 2> unknown_excluded = {0, 0};
};

std::vector<RegionalClusterProportions> regional_proportions(std::span<const DriverRoute> routes,
                                                             std::span<const TripRecord> trips,
                                                             std::span<const int> assignments, int k,
                                                             const RegionMap& region_map);

}  // namespace tripweave
