#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "tripweave/candidate_index.hpp"
#include "tripweave/rng.hpp"
#include "tripweave/timestamp.hpp"
#include "tripweave/trip.hpp"

namespace tripweave {

struct SimParams {
  double alpha_hours = 0.25;      // max idle gap between trips
  double max_dist_mi = 1.0;       // dropoff -> next pickup
  int max_trips = 25;             // per work session
  double max_session_hours = 8.0; // elapsed end(last) - start(first), gaps included
  int top_k = 10;                 // random pick window over ordered candidates
  uint64_t seed = 0;
  bool partition_by_day = true;   // independent pools per calendar day of start_ts
  double bucket_minutes = 5.0;
  double cell_miles = 1.0;
  int threads = 0;                // 0 = hardware concurrency

  void validate() const;  // throws ConfigError
};

// One hypothetical driver work session. Trips are ordered; consecutive pairs
// satisfy the temporal/spatial constraints under the params that produced it.
struct DriverRoute {
  uint32_t driver_id = 0;
  std::vector<TripIdx> trips;
  CivilDate day;  // calendar date of the first trip's start
  int64_t income_cents = 0;
  int64_t fare_cents = 0;
  int64_t driving_seconds = 0;

  size_t n_trips() const { return trips.size(); }
};

struct SimStats {
  uint64_t total_drivers = 0;
  std::map<uint32_t, uint64_t> route_length_hist;
  uint64_t singleton_routes = 0;
  uint64_t partitions = 0;
  // why extensions stopped / candidates were dropped
  uint64_t session_filtered_candidates = 0;
  uint64_t max_trips_stops = 0;
  uint64_t empty_candidate_stops = 0;
};

struct SimOutput {
  std::vector<DriverRoute> routes;
  SimStats stats;
};

// Uniform pick from a non-empty pool; the pool is not modified.
TripIdx pick_start(std::span<const TripIdx> pool, Rng& rng);

// Uniform pick among the first min(top_k, n) ordered candidates.
TripIdx pick_next(std::span<const CandidateIndex::Candidate> ordered, int top_k, Rng& rng);

enum class Constraint { none, temporal, spatial, max_trips, session_hours };
std::string_view constraint_name(Constraint c);

struct ExtensionCheck {
  bool feasible = false;
  Constraint violated = Constraint::none;  // first violated, in declaration order
};

ExtensionCheck check_extension(const DriverRoute& route, std::span<const TripRecord> trips,
                               TripIdx candidate, const SimParams& params);

// Weaves the trips into driver routes. Every input trip lands in exactly one
// route; identical (trips, seed) replays bit-identically. All trips must carry
// both centroids (DataError otherwise); route chains start at trips that have
// no live feasible predecessor, so forced chains reassemble regardless of seed.
SimOutput simulate(std::span<const TripRecord> trips, const SimParams& params);

struct RouteViolation {
  uint32_t driver_id = 0;
  size_t position = 0;  // index of the offending trip within the route
  Constraint constraint = Constraint::none;
};

struct ValidationReport {
  bool ok = false;
  bool partition_ok = false;
  std::vector<RouteViolation> violations;
  std::string message;
};

// Post-hoc feasibility + partition check against the raw records, independent
// of any state the simulator cached.
ValidationReport validate_routes(const SimOutput& output, std::span<const TripRecord> trips,
                                 const SimParams& params);

}  // namespace tripweave
