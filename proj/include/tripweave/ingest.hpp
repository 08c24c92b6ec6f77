#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tripweave/timestamp.hpp"
#include "tripweave/trip.hpp"

namespace tripweave {

// Logical field -> column name, per the Chicago TNP export by default.
struct SchemaConfig {
  std::string trip_id = "Trip ID";
  std::string start_ts = "Trip Start Timestamp";
  std::string end_ts = "Trip End Timestamp";
  std::string seconds = "Trip Seconds";
  std::string miles = "Trip Miles";
  std::string pickup_area = "Pickup Community Area";
  std::string dropoff_area = "Dropoff Community Area";
  std::string pickup_lat = "Pickup Centroid Latitude";
  std::string pickup_lon = "Pickup Centroid Longitude";
  std::string dropoff_lat = "Dropoff Centroid Latitude";
  std::string dropoff_lon = "Dropoff Centroid Longitude";
  std::string fare = "Fare";
  std::string tip = "Tip";
  std::string extras = "Additional Charges";
  std::string total = "Trip Total";
  TimestampFormat ts_format = TimestampFormat::us_12h;
};

struct ParseOptions {
  // Reject rows missing both community area and centroid for either endpoint.
  // Off for monthly aggregation, which needs no geography.
  bool require_geography = false;
};

// Reject reason keys, fixed so stats are comparable across runs.
namespace reject {
inline constexpr const char* timestamp = "timestamp";
inline constexpr const char* bad_field = "bad-field";
inline constexpr const char* negative_money = "negative-money";
inline constexpr const char* money_mismatch = "money-mismatch";
inline constexpr const char* end_before_start = "end-before-start";
inline constexpr const char* bad_area = "bad-area";
inline constexpr const char* centroid_bounds = "centroid-bounds";
inline constexpr const char* missing_geography = "missing-geography";
}  // namespace reject

struct IngestStats {
  uint64_t rows_read = 0;
  uint64_t rows_accepted = 0;
  std::map<std::string, uint64_t> rejects_by_reason;

  uint64_t rejected_total() const {
    uint64_t n = 0;
    for (const auto& [_, c] : rejects_by_reason) n += c;
    return n;
  }
};

// Chicago bounding box for centroid sanity.
inline constexpr double kMinLat = 41.0, kMaxLat = 42.5;
inline constexpr double kMinLon = -88.5, kMaxLon = -87.0;

// mismatch tolerance on trip_total vs fare+tip+charges (source rounding)
inline constexpr int64_t kMoneyMismatchCents = 2;

// Streaming parse: sink sees accepted records in file order; stats counts every data row.
// A header column named in the schema but absent from the file is a ConfigError.
void for_each_trip(std::istream& in, const SchemaConfig& schema, const ParseOptions& options,
                   IngestStats& stats, const std::function<void(TripRecord&&)>& sink);

std::pair<std::vector<TripRecord>, IngestStats> parse_trips(std::istream& in, const SchemaConfig& schema,
                                                            const ParseOptions& options = {});

std::pair<std::vector<TripRecord>, IngestStats> parse_trips_file(const std::filesystem::path& path,
                                                                 const SchemaConfig& schema,
                                                                 const ParseOptions& options = {});

// Inverse of parsing: accepted records serialize back losslessly (money to the cent,
// doubles shortest-round-trip).
void write_trips_csv(std::ostream& out, std::span<const TripRecord> trips, const SchemaConfig& schema);

}  // namespace tripweave
