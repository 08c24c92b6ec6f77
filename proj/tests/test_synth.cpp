#include <doctest.h>

#include <sstream>

#include "tripweave/errors.hpp"
#include "tripweave/geo.hpp"
#include "tripweave/ingest.hpp"
#include "tripweave/simulator.hpp"
#include "tripweave/synth.hpp"

using namespace tripweave;

namespace {

SimParams envelope_of(const SynthParams& p) {
  SimParams env;
  env.alpha_hours = p.alpha_hours;
  env.max_dist_mi = p.max_dist_mi;
  env.max_trips = p.max_trips;
  env.max_session_hours = p.max_session_hours;
  env.seed = 1;
  return env;
}

SimOutput truth_as_output(const SynthOutput& out) {
  SimOutput sim;
  for (const auto& route : out.truth) {
    DriverRoute r;
    r.driver_id = static_cast<uint32_t>(sim.routes.size());
    r.trips = route;
    r.day = date_of(out.trips[route.front()].start_ts);
    sim.routes.push_back(std::move(r));
  }
  return sim;
}

}  // namespace

TEST_CASE("single driver: trips are emitted and the truth is one feasible route") {
  SynthParams params;
  params.n_drivers = 1;
  params.trips_min = 3;
  params.trips_max = 3;
  params.seed = 5;
  const SynthOutput out = generate(params);
  CHECK(out.trips.size() == 3);
  REQUIRE(out.truth.size() == 1);
  CHECK(out.truth[0].size() == 3);
  const ValidationReport check = validate_routes(truth_as_output(out), out.trips, envelope_of(params));
  CHECK(check.ok);
}

TEST_CASE("seed replay reproduces the pool exactly") {
  SynthParams params;
  params.n_drivers = 40;
  params.seed = 99;
  const SynthOutput a = generate(params);
  const SynthOutput b = generate(params);
  REQUIRE(a.trips.size() == b.trips.size());
  for (size_t i = 0; i < a.trips.size(); ++i) CHECK(a.trips[i] == b.trips[i]);
  CHECK(a.truth == b.truth);

  SynthParams other = params;
  other.seed = 100;
  const SynthOutput c = generate(other);
  bool differs = c.trips.size() != a.trips.size();
  for (size_t i = 0; !differs && i < a.trips.size(); ++i) differs = !(a.trips[i] == c.trips[i]);
  CHECK(differs);
}

TEST_CASE("isolation mode keeps drivers spatially infeasible pairwise") {
  SynthParams params;
  params.n_drivers = 10;
  params.trips_min = 2;
  params.trips_max = 6;
  params.isolation_mode = true;
  params.seed = 31;
  const SynthOutput out = generate(params);

  // brute force: no cross-driver dropoff->pickup hop within max_dist
  std::vector<int> owner(out.trips.size(), -1);
  for (size_t d = 0; d < out.truth.size(); ++d)
    for (TripIdx t : out.truth[d]) owner[t] = static_cast<int>(d);
  double min_cross = 1e18;
  for (size_t i = 0; i < out.trips.size(); ++i) {
    for (size_t j = 0; j < out.trips.size(); ++j) {
      if (owner[i] == owner[j]) continue;
      min_cross = std::min(min_cross, haversine_miles(*out.trips[i].dropoff_centroid,
                                                      *out.trips[j].pickup_centroid));
    }
  }
  CHECK(min_cross > params.max_dist_mi);
}

TEST_CASE("infeasible synth params are rejected") {
  SynthParams params;
  params.gap_minutes_max = 20.0;  // exceeds alpha = 15 minutes
  CHECK_THROWS_AS(params.validate(), ConfigError);

  params = SynthParams{};
  params.jump_miles_max = 1.5;  // exceeds max_dist
  CHECK_THROWS_AS(params.validate(), ConfigError);

  params = SynthParams{};
  params.trips_max = 30;  // exceeds the 25-trip envelope
  CHECK_THROWS_AS(params.validate(), ConfigError);
}

TEST_CASE("generated truth is always feasible under the envelope") {
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    SynthParams params;
    params.n_drivers = 60;
    params.trips_min = 1;
    params.trips_max = 25;
    params.n_days = 3;
    params.seed = seed;
    const SynthOutput out = generate(params);
    const ValidationReport check =
        validate_routes(truth_as_output(out), out.trips, envelope_of(params));
    CHECK(check.ok);

    size_t total = 0;
    for (const auto& r : out.truth) total += r.size();
    CHECK(total == out.trips.size());
  }
}

TEST_CASE("synthetic trips round-trip through ingest") {
  SynthParams params;
  params.n_drivers = 25;
  params.seed = 8;
  const SynthOutput out = generate(params);

  std::ostringstream csv;
  write_trips_csv(csv, out.trips, SchemaConfig{});
  std::istringstream in(csv.str());
  auto [reparsed, stats] = parse_trips(in, SchemaConfig{});
  CHECK(stats.rows_accepted == out.trips.size());
  CHECK(stats.rejected_total() == 0);
  REQUIRE(reparsed.size() == out.trips.size());
  for (size_t i = 0; i < reparsed.size(); ++i) CHECK(reparsed[i] == out.trips[i]);
}

TEST_CASE("isolation + greedy simulate recovers the truth exactly") {
  for (uint64_t seed : {11ull, 22ull, 33ull}) {
    SynthParams params;
    params.n_drivers = 30;
    params.trips_min = 1;
    params.trips_max = 12;
    params.isolation_mode = true;
    params.seed = seed;
    const SynthOutput out = generate(params);

    SimParams sim = envelope_of(params);
    sim.top_k = 1;
    sim.seed = seed * 7 + 1;
    const SimOutput predicted = simulate(out.trips, sim);

    std::vector<std::vector<TripIdx>> predicted_routes;
    for (const auto& r : predicted.routes) predicted_routes.push_back(r.trips);
    const ReconstructionScore s = score(out.truth, predicted_routes);
    CHECK(s.exact_partition);
    CHECK(s.pair_f1 == doctest::Approx(1.0));
  }
}

TEST_CASE("score conventions") {
  using Routes = std::vector<std::vector<TripIdx>>;

  // identity
  const Routes truth = {{0, 1, 2}, {3}, {4, 5}};
  const ReconstructionScore same = score(truth, truth);
  CHECK(*same.pair_precision == doctest::Approx(1.0));
  CHECK(*same.pair_recall == doctest::Approx(1.0));
  CHECK(same.pair_f1 == doctest::Approx(1.0));
  CHECK(same.exact_partition);
  CHECK(same.route_count_delta == 0);

  // all singletons predicted: zero links -> precision null, recall 0
  const Routes singletons = {{0}, {1}, {2}, {3}, {4}, {5}};
  const ReconstructionScore none = score(truth, singletons);
  CHECK(!none.pair_precision.has_value());
  CHECK(*none.pair_recall == doctest::Approx(0.0));
  CHECK(!none.exact_partition);
  CHECK(none.pair_f1 == doctest::Approx(0.0));
  CHECK(none.route_count_delta == 3);

  // truth [A,B,C] vs predicted [A,B],[C]
  const Routes abc = {{0, 1, 2}};
  const Routes split = {{0, 1}, {2}};
  const ReconstructionScore partial = score(abc, split);
  CHECK(*partial.pair_precision == doctest::Approx(1.0));
  CHECK(*partial.pair_recall == doctest::Approx(0.5));
  CHECK(partial.pair_f1 == doctest::Approx(2.0 / 3.0));

  // mismatched universes
  CHECK_THROWS_AS(score(abc, Routes{{0, 1}}), DataError);

  // all-singleton truth and prediction: exact, f1 pinned to 1
  const Routes lone = {{0}, {1}};
  const ReconstructionScore exact_no_links = score(lone, lone);
  CHECK(exact_no_links.exact_partition);
  CHECK(exact_no_links.pair_f1 == doctest::Approx(1.0));
  CHECK(!exact_no_links.pair_precision.has_value());
  CHECK(!exact_no_links.pair_recall.has_value());
}

TEST_CASE("score by string id") {
  const std::vector<std::vector<std::string>> truth = {{"a", "b"}, {"c"}};
  const std::vector<std::vector<std::string>> predicted = {{"a", "b"}, {"c"}};
  CHECK(score_by_id(truth, predicted).exact_partition);
  const std::vector<std::vector<std::string>> wrong = {{"b", "a"}, {"c"}};
  const ReconstructionScore s = score_by_id(truth, wrong);
  CHECK(!s.exact_partition);
  CHECK(*s.pair_precision == doctest::Approx(0.0));
}
