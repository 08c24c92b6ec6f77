#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "tripweave/geo.hpp"
#include "tripweave/trip.hpp"

namespace tripweave {

// Closed temporal window [end_ts, end_ts + alpha] evaluated on integer seconds.
inline int64_t alpha_window_seconds(double alpha_hours) {
  return static_cast<int64_t>(std::floor(alpha_hours * 3600.0 + 1e-9));
}

inline int64_t session_window_seconds(double max_session_hours) {
  return static_cast<int64_t>(std::floor(max_session_hours * 3600.0 + 1e-9));
}

// Time-bucket + spatial-grid index over unassigned trips, keyed by pickup
// location and start time. Answers "live trips starting within [t, t+alpha]
// with pickup within max_dist of p" without scanning the whole pool.
//
// Storage is one flat hash map over (grid cell, time bucket) groups holding
// small unsorted vectors; membership positions are tracked per trip so
// removal is exact. Distance filtering pre-rejects with an equirectangular
// bound and only runs the exact haversine near and inside the radius.
//
// Single-writer: queries must not run concurrently with remove().
class CandidateIndex {
 public:
  struct Candidate {
    TripIdx idx;
    int64_t start_ts;
    double distance_mi;
  };

  // Indexes every trip in `subset` (or all of `trips`) that has a pickup
  // centroid; the rest are excluded and counted.
  explicit CandidateIndex(std::span<const TripRecord> trips, double bucket_minutes = 5.0,
                          double cell_miles = 1.0);
  CandidateIndex(std::span<const TripRecord> trips, std::span<const TripIdx> subset,
                 double bucket_minutes = 5.0, double cell_miles = 1.0);

  // Result ordered by (start_ts, distance, idx); equivalent to a brute-force
  // filter + sort over all live trips.
  void query(const GeoPoint& dropoff, int64_t end_ts, double alpha_hours, double max_dist_mi,
             std::vector<Candidate>& out) const;
  std::vector<TripIdx> query_candidates(const GeoPoint& dropoff, int64_t end_ts, double alpha_hours,
                                        double max_dist_mi) const;

  // Exact removal; throws std::logic_error if idx is not live (simulator bug).
  void remove(TripIdx idx);

  bool is_live(TripIdx idx) const;
  size_t live_count() const { return live_.size(); }
  const std::vector<TripIdx>& live_trips() const { return live_; }
  size_t indexed_count() const { return ids_.size(); }
  size_t excluded_count() const { return excluded_; }

  // Introspection for tests.
  int64_t bucket_of(TripIdx idx) const;
  uint64_t cell_of(TripIdx idx) const;
  size_t group_count() const { return groups_.size(); }  // live (cell, bucket) groups
  size_t bucket_count() const;                           // distinct buckets among live trips
  size_t cell_count() const;                             // distinct cells among live trips

  // Verifies live <-> exactly-one-group membership and the absence of stale
  // entries. Linear scan; test use only.
  bool check_invariants() const;

 private:
  struct Entry {
    int64_t start_ts = 0;
    GeoPoint pickup;
    int64_t bucket = 0;
    uint64_t cell = 0;
    uint32_t pos_in_group = 0;
    uint32_t pos_in_live = 0;
    bool live = false;
  };

  struct GroupKey {
    uint64_t cell;
    int64_t bucket;
    bool operator==(const GroupKey&) const = default;
  };
  struct GroupKeyHash {
    size_t operator()(const GroupKey& k) const {
      uint64_t h = k.cell * 0x9e3779b97f4a7c15ULL;
      h ^= static_cast<uint64_t>(k.bucket) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return static_cast<size_t>(h * 0xbf58476d1ce4e5b9ULL);
    }
  };

  uint64_t cell_key_of(const GeoPoint& p) const;
  const Entry* entry_of(TripIdx idx) const;
  Entry* entry_of(TripIdx idx);

  int64_t bucket_seconds_ = 300;
  double cell_lat_deg_ = 0;
  double cell_lon_deg_ = 0;
  size_t excluded_ = 0;

  std::vector<int32_t> slot_;   // trip idx -> dense entry slot, -1 if not indexed
  std::vector<Entry> entries_;  // dense
  std::vector<TripIdx> ids_;    // dense slot -> trip idx
  std::vector<TripIdx> live_;
  std::unordered_map<GroupKey, std::vector<TripIdx>, GroupKeyHash> groups_;
};

}  // namespace tripweave
