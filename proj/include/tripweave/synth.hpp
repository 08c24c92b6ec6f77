#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tripweave/timestamp.hpp"
#include "tripweave/trip.hpp"

namespace tripweave {

struct SynthParams {
  int n_drivers = 100;
  int trips_min = 1;
  int trips_max = 25;
  double gap_minutes_min = 1.0;
  double gap_minutes_max = 15.0;
  double jump_miles_min = 0.0;
  double jump_miles_max = 0.8;
  double duration_minutes_min = 5.0;
  double duration_minutes_max = 40.0;

  // linear fare model
  double fare_base_usd = 2.50;
  double fare_per_mile_usd = 1.25;
  double fare_per_minute_usd = 0.30;
  double tip_rate_max = 0.30;   // tip uniform in [0, rate] of fare
  double extras_max_usd = 4.0;

  // spatial layout
  int n_centers = 9;            // demand hotspots when not isolated
  double scatter_miles = 6.0;   // hotspot spread around the city core
  bool isolation_mode = false;  // one spatial island per driver; no cross-driver link feasible

  CivilDate start_day{2019, 8, 5};
  int n_days = 1;
  uint64_t seed = 0;

  // feasibility envelope every truth route must satisfy
  double alpha_hours = 0.25;
  double max_dist_mi = 1.0;
  int max_trips = 25;
  double max_session_hours = 8.0;

  void validate() const;  // throws ConfigError on an infeasible combination
};

struct SynthOutput {
  std::vector<TripRecord> trips;            // shuffled and re-identified
  std::vector<std::vector<TripIdx>> truth;  // ground-truth routes over shuffled indices
};

// Ground-truth driver routes anonymized into a trip pool. Deterministic per
// seed; every truth route is feasible under the params' envelope, and the
// records round-trip through ingest.
SynthOutput generate(const SynthParams& params);

struct ReconstructionScore {
  std::optional<double> pair_precision;  // null when the prediction has zero links
  std::optional<double> pair_recall;     // null when the truth has zero links
  double pair_f1 = 0;                    // 1 whenever exact_partition
  bool exact_partition = false;
  int64_t route_count_delta = 0;  // predicted - truth
  uint64_t truth_links = 0;
  uint64_t predicted_links = 0;
  uint64_t common_links = 0;
};

// Link-level precision/recall over ordered adjacent trip pairs. Both sides
// must cover the same trip-id universe (DataError otherwise).
ReconstructionScore score(std::span<const std::vector<TripIdx>> truth,
                          std::span<const std::vector<TripIdx>> predicted);

// Same scoring over opaque trip-id sequences (file-boundary form).
ReconstructionScore score_by_id(const std::vector<std::vector<std::string>>& truth,
                                const std::vector<std::vector<std::string>>& predicted);

}  // namespace tripweave
