#include "tripweave/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "tripweave/candidate_index.hpp"
#include "tripweave/errors.hpp"
#include "tripweave/geo.hpp"
#include "tripweave/ingest.hpp"
#include "tripweave/money.hpp"
#include "tripweave/region.hpp"
#include "tripweave/rng.hpp"
#include "tripweave/simulator.hpp"

namespace tripweave {

namespace {

// Generation stays inside the ingest bounding box with a small margin.
constexpr double kBoxLatMin = 41.02, kBoxLatMax = 42.48;
constexpr double kBoxLonMin = -88.48, kBoxLonMax = -87.02;
constexpr double kCoreLat = 41.88, kCoreLon = -87.63;

GeoPoint clamp_box(GeoPoint p) {
  p.lat = std::clamp(p.lat, kBoxLatMin, kBoxLatMax);
  p.lon = std::clamp(p.lon, kBoxLonMin, kBoxLonMax);
  return p;
}

// Planar offset by (miles, bearing); exact enough at city scale, and all jump
// distances carry a margin that absorbs the projection error.
GeoPoint offset(const GeoPoint& p, double miles, double theta) {
  GeoPoint out;
  out.lat = p.lat + miles * std::cos(theta) / kMilesPerDegreeLat;
  const double cos_lat = std::cos(p.lat * std::numbers::pi / 180.0);
  out.lon = p.lon + miles * std::sin(theta) / (kMilesPerDegreeLat * std::max(0.2, cos_lat));
  return clamp_box(out);
}

GeoPoint point_in_disc(const GeoPoint& center, double radius, Rng& rng) {
  const double r = radius * std::sqrt(rng.next_double());
  const double theta = rng.next_double() * 2.0 * std::numbers::pi;
  return offset(center, r, theta);
}

int64_t usd_to_cents(double usd) { return std::llround(usd * 100.0); }

}  // namespace

void SynthParams::validate() const {
  if (n_drivers < 1) throw ConfigError("synth: n_drivers must be >= 1");
  if (trips_min < 1 || trips_max < trips_min) throw ConfigError("synth: bad trips_per_driver range");
  if (trips_max > max_trips) throw ConfigError("synth: trips_max exceeds the max_trips envelope");
  if (gap_minutes_min < 0 || gap_minutes_max < gap_minutes_min)
    throw ConfigError("synth: bad gap_minutes range");
  if (gap_minutes_max * 60.0 > static_cast<double>(alpha_window_seconds(alpha_hours)) + 1e-9)
    throw ConfigError("synth: gap_minutes_max exceeds alpha; truth would be infeasible");
  if (jump_miles_min < 0 || jump_miles_max < jump_miles_min)
    throw ConfigError("synth: bad jump_miles range");
  if (jump_miles_max > max_dist_mi) throw ConfigError("synth: jump_miles_max exceeds max_dist");
  if (duration_minutes_min <= 0 || duration_minutes_max < duration_minutes_min)
    throw ConfigError("synth: bad duration range");
  if (duration_minutes_max > max_session_hours * 60.0)
    throw ConfigError("synth: a single trip would exceed the session bound");
  if (n_days < 1) throw ConfigError("synth: n_days must be >= 1");
  if (n_centers < 1) throw ConfigError("synth: n_centers must be >= 1");
}

SynthOutput generate(const SynthParams& params) {
  params.validate();

  // Island grid for isolation mode: spacing leaves more than max_dist between
  // any two islands' discs, so no cross-driver link can be feasible.
  const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(params.n_drivers))));
  const double extent_lat_mi = (kBoxLatMax - kBoxLatMin - 0.06) * kMilesPerDegreeLat;
  const double mid_cos = std::cos(0.5 * (kBoxLatMin + kBoxLatMax) * std::numbers::pi / 180.0);
  const double extent_lon_mi = (kBoxLonMax - kBoxLonMin - 0.06) * kMilesPerDegreeLat * mid_cos;
  const double spacing_mi = std::min(extent_lat_mi, extent_lon_mi) / static_cast<double>(grid);
  const double island_radius = 0.45 * (spacing_mi - params.max_dist_mi * 1.1);
  if (params.isolation_mode && island_radius < 0.02)
    throw ConfigError("synth: too many drivers for isolation_mode in the city bounding box");

  auto island_center = [&](int driver) {
    const int gy = driver / grid, gx = driver % grid;
    GeoPoint p;
    p.lat = kBoxLatMin + 0.03 + (static_cast<double>(gy) + 0.5) * (kBoxLatMax - kBoxLatMin - 0.06) /
                                    static_cast<double>(grid);
    p.lon = kBoxLonMin + 0.03 + (static_cast<double>(gx) + 0.5) * (kBoxLonMax - kBoxLonMin - 0.06) /
                                    static_cast<double>(grid);
    return p;
  };

  std::vector<GeoPoint> hotspots;
  if (!params.isolation_mode) {
    Rng hrng = Rng::substream(params.seed, 0x686f7473ULL);
    hotspots.push_back({kCoreLat, kCoreLon});
    for (int h = 1; h < params.n_centers; ++h)
      hotspots.push_back(point_in_disc({kCoreLat, kCoreLon}, params.scatter_miles, hrng));
  }

  const int64_t session_s = session_window_seconds(params.max_session_hours);
  const double jump_cap = std::min(params.jump_miles_max, params.max_dist_mi) * 0.999;
  const int64_t day0 = days_from_civil(params.start_day.year, params.start_day.month, params.start_day.day);

  std::vector<TripRecord> trips;
  std::vector<std::vector<size_t>> truth(static_cast<size_t>(params.n_drivers));

  for (int driver = 0; driver < params.n_drivers; ++driver) {
    Rng rng = Rng::substream(params.seed, 0x64726976ULL + static_cast<uint64_t>(driver));
    const int64_t day = day0 + (params.n_days > 1 ? static_cast<int64_t>(rng.bounded(params.n_days)) : 0);

    int hotspot = params.isolation_mode ? 0 : static_cast<int>(rng.bounded(hotspots.size()));
    const GeoPoint base = params.isolation_mode ? island_center(driver) : hotspots[static_cast<size_t>(hotspot)];
    const double local_radius = params.isolation_mode ? island_radius : 1.5;
    const int area = params.isolation_mode ? (driver % kNumCommunityAreas) + 1
                                           : (hotspot % kNumCommunityAreas) + 1;

    // Sessions start early enough to finish the same day, so default per-day
    // partitioning never severs a truth chain.
    int64_t t = day * 86400 + 4 * 3600 +
                static_cast<int64_t>(rng.bounded(10 * 3600));
    const int64_t session_start = t;
    const auto n_target =
        static_cast<size_t>(rng.uniform_int(params.trips_min, params.trips_max));

    GeoPoint pickup = point_in_disc(base, local_radius, rng);
    int cur_area = area;
    for (size_t k = 0; k < n_target; ++k) {
      const int64_t duration =
          std::llround(rng.uniform(params.duration_minutes_min, params.duration_minutes_max) * 60.0);
      if (k > 0 && (t + duration) - session_start > session_s) break;

      GeoPoint dropoff;
      int drop_area = cur_area;
      if (params.isolation_mode) {
        dropoff = point_in_disc(base, island_radius, rng);
      } else {
        if (rng.next_double() < 0.2) hotspot = static_cast<int>(rng.bounded(hotspots.size()));
        drop_area = (hotspot % kNumCommunityAreas) + 1;
        dropoff = point_in_disc(hotspots[static_cast<size_t>(hotspot)], 2.5, rng);
      }

      TripRecord trip;
      trip.trip_id = "D" + std::to_string(driver) + "." + std::to_string(k);  // replaced after shuffling
      trip.start_ts = t;
      trip.end_ts = t + duration;
      trip.duration_s = duration;
      trip.distance_mi = std::max(0.1, haversine_miles(pickup, dropoff) * rng.uniform(1.0, 1.3));
      trip.pickup_area = cur_area;
      trip.dropoff_area = drop_area;
      trip.pickup_centroid = pickup;
      trip.dropoff_centroid = dropoff;
      trip.fare_cents = usd_to_cents(params.fare_base_usd + params.fare_per_mile_usd * trip.distance_mi +
                                     params.fare_per_minute_usd * static_cast<double>(duration) / 60.0);
      trip.tip_cents = usd_to_cents(cents_to_usd(trip.fare_cents) * rng.uniform(0.0, params.tip_rate_max));
      trip.extras_cents = usd_to_cents(rng.uniform(0.0, params.extras_max_usd));
      trip.total_cents = trip.fare_cents + trip.tip_cents + trip.extras_cents;

      truth[static_cast<size_t>(driver)].push_back(trips.size());
      trips.push_back(std::move(trip));

      // Next pickup: a short hop from this dropoff, kept inside the local disc
      // in isolation mode.
      const int64_t gap =
          std::llround(rng.uniform(params.gap_minutes_min, params.gap_minutes_max) * 60.0);
      t = t + duration + gap;
      const double jump = rng.uniform(params.jump_miles_min, jump_cap);
      GeoPoint next = pickup;
      for (int attempt = 0; attempt < 20; ++attempt) {
        next = offset(dropoff, jump, rng.next_double() * 2.0 * std::numbers::pi);
        if (!params.isolation_mode || haversine_miles(next, base) <= island_radius) break;
        next = dropoff;
      }
      pickup = haversine_miles(next, dropoff) <= params.max_dist_mi ? next : dropoff;
      cur_area = drop_area;
    }
  }

  // Shuffle and re-identify: the pool alone no longer reveals the truth.
  SynthOutput out;
  std::vector<size_t> perm(trips.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng shuffle_rng = Rng::substream(params.seed, 0x73687566ULL);
  for (size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[shuffle_rng.bounded(i)]);

  std::vector<TripIdx> new_pos(trips.size());
  out.trips.resize(trips.size());
  for (size_t pos = 0; pos < perm.size(); ++pos) {
    out.trips[pos] = std::move(trips[perm[pos]]);
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "T%07zu", pos);
    out.trips[pos].trip_id = idbuf;
    new_pos[perm[pos]] = static_cast<TripIdx>(pos);
  }
  out.truth.reserve(truth.size());
  for (const auto& route : truth) {
    std::vector<TripIdx> mapped;
    mapped.reserve(route.size());
    for (size_t old : route) mapped.push_back(new_pos[old]);
    out.truth.push_back(std::move(mapped));
  }

  // Construction bug guard: the truth must satisfy its own envelope.
  SimParams env;
  env.alpha_hours = params.alpha_hours;
  env.max_dist_mi = params.max_dist_mi;
  env.max_trips = params.max_trips;
  env.max_session_hours = params.max_session_hours;
  env.seed = params.seed;
  SimOutput as_output;
  for (const auto& route : out.truth) {
    DriverRoute r;
    r.driver_id = static_cast<uint32_t>(as_output.routes.size());
    r.trips = route;
    r.day = date_of(out.trips[route.front()].start_ts);
    as_output.routes.push_back(std::move(r));
  }
  const ValidationReport check = validate_routes(as_output, out.trips, env);
  if (!check.ok) throw std::logic_error("synth: generated truth violates its feasibility envelope");

  return out;
}

namespace {

uint64_t pack_link(uint32_t a, uint32_t b) { return (static_cast<uint64_t>(a) << 32) | b; }

ReconstructionScore score_indexed(std::span<const std::vector<TripIdx>> truth,
                                  std::span<const std::vector<TripIdx>> predicted) {
  ReconstructionScore s;
  std::unordered_set<uint64_t> truth_links;
  for (const auto& route : truth)
    for (size_t i = 0; i + 1 < route.size(); ++i) truth_links.insert(pack_link(route[i], route[i + 1]));
  uint64_t predicted_links = 0, common = 0;
  for (const auto& route : predicted) {
    for (size_t i = 0; i + 1 < route.size(); ++i) {
      ++predicted_links;
      if (truth_links.count(pack_link(route[i], route[i + 1]))) ++common;
    }
  }
  s.truth_links = truth_links.size();
  s.predicted_links = predicted_links;
  s.common_links = common;
  if (predicted_links > 0)
    s.pair_precision = static_cast<double>(common) / static_cast<double>(predicted_links);
  if (!truth_links.empty())
    s.pair_recall = static_cast<double>(common) / static_cast<double>(truth_links.size());
  s.route_count_delta =
      static_cast<int64_t>(predicted.size()) - static_cast<int64_t>(truth.size());

  auto canonical = [](std::span<const std::vector<TripIdx>> routes) {
    std::vector<std::vector<TripIdx>> c(routes.begin(), routes.end());
    std::sort(c.begin(), c.end());
    return c;
  };
  s.exact_partition = canonical(truth) == canonical(predicted);

  if (s.exact_partition) {
    s.pair_f1 = 1.0;
  } else if (s.pair_precision && s.pair_recall && (*s.pair_precision + *s.pair_recall) > 0) {
    s.pair_f1 = 2.0 * *s.pair_precision * *s.pair_recall / (*s.pair_precision + *s.pair_recall);
  }
  return s;
}

}  // namespace

ReconstructionScore score(std::span<const std::vector<TripIdx>> truth,
                          std::span<const std::vector<TripIdx>> predicted) {
  std::unordered_set<TripIdx> a, b;
  for (const auto& r : truth) a.insert(r.begin(), r.end());
  for (const auto& r : predicted) b.insert(r.begin(), r.end());
  if (a != b) throw DataError("score: truth and prediction cover different trip id universes");
  return score_indexed(truth, predicted);
}

ReconstructionScore score_by_id(const std::vector<std::vector<std::string>>& truth,
                                const std::vector<std::vector<std::string>>& predicted) {
  std::unordered_map<std::string, TripIdx> ids;
  auto intern = [&](const std::string& id) {
    auto [it, _] = ids.try_emplace(id, static_cast<TripIdx>(ids.size()));
    return it->second;
  };
  std::vector<std::vector<TripIdx>> t, p;
  t.reserve(truth.size());
  for (const auto& route : truth) {
    std::vector<TripIdx> r;
    r.reserve(route.size());
    for (const auto& id : route) r.push_back(intern(id));
    t.push_back(std::move(r));
  }
  p.reserve(predicted.size());
  for (const auto& route : predicted) {
    std::vector<TripIdx> r;
    r.reserve(route.size());
    for (const auto& id : route) r.push_back(intern(id));
    p.push_back(std::move(r));
  }
  return score(t, p);
}

}  // namespace tripweave
