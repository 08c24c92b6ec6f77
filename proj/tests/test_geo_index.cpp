#include <doctest.h>

#include <algorithm>

#include "tripweave/candidate_index.hpp"
#include "tripweave/geo.hpp"
#include "tripweave/rng.hpp"
#include "tripweave/timestamp.hpp"

using namespace tripweave;

namespace {

TripRecord make_trip(int64_t start_ts, GeoPoint pickup, GeoPoint dropoff, int64_t duration = 600) {
  TripRecord t;
  t.start_ts = start_ts;
  t.end_ts = start_ts + duration;
  t.duration_s = duration;
  t.pickup_centroid = pickup;
  t.dropoff_centroid = dropoff;
  return t;
}

// Reference implementation the index must agree with: scan, filter, sort.
std::vector<TripIdx> brute_force(const std::vector<TripRecord>& trips, const CandidateIndex& index,
                                 GeoPoint dropoff, int64_t end_ts, double alpha_hours,
                                 double max_dist) {
  struct Hit {
    int64_t start;
    double dist;
    TripIdx idx;
  };
  std::vector<Hit> hits;
  const int64_t latest = end_ts + alpha_window_seconds(alpha_hours);
  for (TripIdx i = 0; i < trips.size(); ++i) {
    if (!index.is_live(i)) continue;
    const TripRecord& t = trips[i];
    if (t.start_ts < end_ts || t.start_ts > latest) continue;
    const double d = haversine_miles(dropoff, *t.pickup_centroid);
    if (d > max_dist) continue;
    hits.push_back({t.start_ts, d, i});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.idx < b.idx;
  });
  std::vector<TripIdx> ids;
  for (const Hit& h : hits) ids.push_back(h.idx);
  return ids;
}

}  // namespace

TEST_CASE("haversine basics") {
  const GeoPoint loop{41.88, -87.63};
  CHECK(haversine_miles(loop, loop) == 0.0);

  // one degree of latitude at the equator: pi * R / 180
  CHECK(haversine_miles({0, 0}, {1, 0}) == doctest::Approx(69.094).epsilon(0.0002));

  // downtown Chicago to O'Hare, checked against an independent geodesic calculator
  const double d = haversine_miles({41.8781, -87.6298}, {41.9742, -87.9073});
  CHECK(d > 15.7);
  CHECK(d < 16.1);
}

TEST_CASE("haversine symmetry is exact") {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint a{rng.uniform(-80, 80), rng.uniform(-179, 179)};
    const GeoPoint b{rng.uniform(-80, 80), rng.uniform(-179, 179)};
    CHECK(haversine_miles(a, b) == haversine_miles(b, a));
    CHECK(haversine_miles(a, b) >= 0.0);
  }
}

TEST_CASE("empty index") {
  std::vector<TripRecord> none;
  CandidateIndex index(none);
  CHECK(index.live_count() == 0);
  CHECK(index.query_candidates({41.9, -87.6}, 0, 0.25, 1.0).empty());
  CHECK(index.check_invariants());
}

TEST_CASE("time bucketing puts trips in distinct buckets") {
  const GeoPoint p{41.9, -87.65};
  const int64_t base = civil_seconds(2019, 8, 5, 10, 0, 0);
  std::vector<TripRecord> trips = {make_trip(base, p, p), make_trip(base + 300, p, p),
                                   make_trip(base + 1200, p, p)};
  CandidateIndex index(trips, 5.0, 1.0);
  CHECK(index.indexed_count() == 3);
  CHECK(index.bucket_of(0) != index.bucket_of(1));
  CHECK(index.bucket_of(1) != index.bucket_of(2));
  CHECK(index.cell_of(0) == index.cell_of(1));  // identical pickup point
  CHECK(index.check_invariants());
}

TEST_CASE("two miles apart lands in non-adjacent one-mile cells") {
  const GeoPoint a{41.90, -87.65};
  const GeoPoint b{41.90 + 2.0 / kMilesPerDegreeLat, -87.65};  // two miles due north
  std::vector<TripRecord> trips = {make_trip(0, a, a), make_trip(0, b, b)};
  CandidateIndex index(trips, 5.0, 1.0);
  const auto ya = static_cast<int32_t>(index.cell_of(0) >> 32);
  const auto yb = static_cast<int32_t>(index.cell_of(1) >> 32);
  CHECK(std::abs(ya - yb) >= 2);
}

TEST_CASE("trips without pickup centroid are excluded and reported") {
  const GeoPoint p{41.9, -87.65};
  std::vector<TripRecord> trips = {make_trip(0, p, p)};
  TripRecord no_pickup = make_trip(0, p, p);
  no_pickup.pickup_centroid.reset();
  trips.push_back(no_pickup);
  CandidateIndex index(trips);
  CHECK(index.indexed_count() == 1);
  CHECK(index.excluded_count() == 1);
  CHECK(!index.is_live(1));
}

TEST_CASE("query window and distance bounds") {
  const GeoPoint x{41.90, -87.65};
  const int64_t end = civil_seconds(2019, 8, 5, 10, 30, 0);
  std::vector<TripRecord> trips = {
      make_trip(end + 300, x, x),    // 5 min later, same point: in
      make_trip(end + 960, x, x),    // 16 min later: out
      make_trip(end + 900, x, x),    // exactly on the closed boundary: in
      make_trip(end, x, x),          // zero gap boundary: in
      make_trip(end - 1, x, x),      // starts before the dropoff: out
  };
  CandidateIndex index(trips);
  const auto got = index.query_candidates(x, end, 0.25, 1.0);
  CHECK(got == std::vector<TripIdx>{3, 0, 2});
}

TEST_CASE("near-boundary candidates in adjacent cells are found") {
  const GeoPoint q{41.90, -87.65};
  const double deg_per_mile_lat = 1.0 / kMilesPerDegreeLat;
  std::vector<TripRecord> trips;
  // ring of candidates right inside / outside the 1-mile radius, crossing cell lines
  for (double miles : {0.999, 1.001}) {
    for (double bearing : {0.0, 90.0, 180.0, 270.0, 45.0}) {
      const double rad = bearing * 3.14159265358979 / 180.0;
      GeoPoint p;
      p.lat = q.lat + miles * std::cos(rad) * deg_per_mile_lat;
      p.lon = q.lon + miles * std::sin(rad) * deg_per_mile_lat /
                          std::cos(q.lat * 3.14159265358979 / 180.0);
      trips.push_back(make_trip(1000, p, p));
    }
  }
  CandidateIndex index(trips, 5.0, 1.0);
  const auto got = index.query_candidates(q, 1000, 0.25, 1.0);
  const auto expected = brute_force(trips, index, q, 1000, 0.25, 1.0);
  CHECK(got == expected);
  CHECK(got.size() >= 4);       // the inside ring
  CHECK(got.size() <= 6);       // outside ring stays out (allowing fp slack on the diagonal)
}

TEST_CASE("randomized queries match brute force") {
  Rng rng(2024);
  for (int round = 0; round < 5; ++round) {
    std::vector<TripRecord> trips;
    const size_t n = 200 + rng.bounded(800);
    const int64_t day = civil_seconds(2019, 8, 5);
    for (size_t i = 0; i < n; ++i) {
      const GeoPoint pickup{rng.uniform(41.7, 42.1), rng.uniform(-87.9, -87.5)};
      const GeoPoint dropoff{rng.uniform(41.7, 42.1), rng.uniform(-87.9, -87.5)};
      trips.push_back(make_trip(day + static_cast<int64_t>(rng.bounded(86400)), pickup, dropoff,
                                static_cast<int64_t>(rng.bounded(3600))));
    }
    CandidateIndex index(trips, rng.uniform(1, 10), rng.uniform(0.3, 2.0));
    for (int q = 0; q < 40; ++q) {
      // remove a few live trips between queries
      for (int r = 0; r < 3 && index.live_count() > 0; ++r) {
        const auto& live = index.live_trips();
        index.remove(live[rng.bounded(live.size())]);
      }
      const GeoPoint at{rng.uniform(41.7, 42.1), rng.uniform(-87.9, -87.5)};
      const int64_t end = day + static_cast<int64_t>(rng.bounded(86400));
      const double alpha = rng.uniform(0.05, 0.5);
      const double dist = rng.uniform(0.2, 3.0);
      CHECK(index.query_candidates(at, end, alpha, dist) ==
            brute_force(trips, index, at, end, alpha, dist));
    }
    CHECK(index.check_invariants());
  }
}

TEST_CASE("removal is exact and double-removal throws") {
  const GeoPoint p{41.9, -87.65};
  std::vector<TripRecord> trips = {make_trip(0, p, p)};
  CandidateIndex index(trips);
  index.remove(0);
  CHECK(index.query_candidates(p, 0, 0.25, 1.0).empty());
  CHECK_THROWS_AS(index.remove(0), std::logic_error);
}

TEST_CASE("thousand inserts and removes leave nothing behind") {
  Rng rng(77);
  std::vector<TripRecord> trips;
  for (int i = 0; i < 1000; ++i) {
    const GeoPoint p{rng.uniform(41.7, 42.1), rng.uniform(-87.9, -87.5)};
    trips.push_back(make_trip(static_cast<int64_t>(rng.bounded(86400)), p, p));
  }
  CandidateIndex index(trips);
  CHECK(index.live_count() == 1000);
  CHECK(index.check_invariants());

  std::vector<TripIdx> order(1000);
  for (TripIdx i = 0; i < 1000; ++i) order[i] = i;
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.bounded(i)]);
  for (TripIdx idx : order) index.remove(idx);

  CHECK(index.live_count() == 0);
  CHECK(index.bucket_count() == 0);
  CHECK(index.cell_count() == 0);
  CHECK(index.check_invariants());
}
