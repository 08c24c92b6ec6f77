#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tripweave/analytics.hpp"
#include "tripweave/errors.hpp"
#include "tripweave/rng.hpp"

using namespace tripweave;

namespace {

TripRecord money_trip(int year, int month, int64_t duration_s, int64_t total_cents,
                      std::optional<int> pickup_area = std::nullopt,
                      std::optional<int> dropoff_area = std::nullopt) {
  TripRecord t;
  t.start_ts = civil_seconds(year, month, 5, 10, 0, 0);
  t.end_ts = t.start_ts + duration_s;
  t.duration_s = duration_s;
  t.pickup_area = pickup_area;
  t.dropoff_area = dropoff_area;
  t.fare_cents = total_cents;
  t.total_cents = total_cents;
  return t;
}

const RegionMap& default_map() {
  static RegionMap map = load_region_map(std::filesystem::path(TW_CONFIG_DIR) / "chicago_regions.csv");
  return map;
}

}  // namespace

TEST_CASE("monthly rate is a ratio of sums") {
  // one trip: $30 over half an hour
  {
    std::vector<TripRecord> trips = {money_trip(2019, 3, 1800, 3000)};
    const MonthlySeries s = monthly_cost_per_hour(trips);
    REQUIRE(s.rows.size() == 1);
    CHECK(*s.rows[0].cost_per_driving_hour == doctest::Approx(60.0));
  }
  // $30/0.5h plus $10/1.0h: ratio-of-sums 26.67, mean-of-ratios 35
  {
    std::vector<TripRecord> trips = {money_trip(2019, 3, 1800, 3000), money_trip(2019, 3, 3600, 1000)};
    const MonthlySeries s = monthly_cost_per_hour(trips);
    REQUIRE(s.rows.size() == 1);
    CHECK(*s.rows[0].cost_per_driving_hour == doctest::Approx(40.0 / 1.5));
    CHECK(*s.rows[0].cost_per_driving_hour == doctest::Approx(26.67).epsilon(0.001));
    CHECK(*s.rows[0].cost_mean_of_ratios == doctest::Approx(35.0));
  }
}

TEST_CASE("monthly series is contiguous with null rates for empty months") {
  std::vector<TripRecord> trips = {money_trip(2019, 1, 1800, 3000), money_trip(2019, 4, 1800, 3000)};
  const MonthlySeries s = monthly_cost_per_hour(trips);
  REQUIRE(s.rows.size() == 4);
  CHECK(s.rows[1].month == 2);
  CHECK(s.rows[1].n_trips == 0);
  CHECK(!s.rows[1].cost_per_driving_hour.has_value());
  CHECK(s.rows[3].month == 4);
  CHECK(s.rows[3].cost_per_driving_hour.has_value());
}

TEST_CASE("monthly excludes zero-duration trips with a counter") {
  std::vector<TripRecord> trips = {money_trip(2019, 3, 0, 99999), money_trip(2019, 3, 1800, 3000)};
  const MonthlySeries s = monthly_cost_per_hour(trips);
  CHECK(s.zero_duration_excluded == 1);
  CHECK(*s.rows[0].cost_per_driving_hour == doctest::Approx(60.0));
}

TEST_CASE("monthly rate steps up when fares step up") {
  std::vector<TripRecord> trips;
  for (int m = 1; m <= 12; ++m) trips.push_back(money_trip(2019, m, 1800, m <= 6 ? 1000 : 2500));
  const MonthlySeries s = monthly_cost_per_hour(trips);
  for (size_t i = 6; i < 12; ++i) CHECK(*s.rows[i].cost_per_driving_hour >
                                        *s.rows[i - 6].cost_per_driving_hour);
}

TEST_CASE("cpi adjustment") {
  std::vector<TripRecord> trips;
  for (int m = 1; m <= 12; ++m) trips.push_back(money_trip(2021, m, 3600, 10000));  // flat $100/hr
  const MonthlySeries nominal = monthly_cost_per_hour(trips);

  CpiTable rising;
  for (int m = 1; m <= 12; ++m)
    rising.index[{2021, m}] = 100.0 * (1.0 + 0.15 * (m - 1) / 11.0);  // +15% across the span
  const MonthlySeries real = cpi_adjust(nominal, rising, 2021, 1);
  CHECK(*real.rows[0].cost_per_driving_hour == doctest::Approx(100.0));
  CHECK(*real.rows[11].cost_per_driving_hour == doctest::Approx(100.0 / 1.15));
  CHECK(*real.rows[11].cost_per_driving_hour == doctest::Approx(86.96).epsilon(0.001));

  CpiTable constant;
  for (int m = 1; m <= 12; ++m) constant.index[{2021, m}] = 123.4;
  const MonthlySeries same = cpi_adjust(nominal, constant, 2021, 6);
  for (size_t i = 0; i < 12; ++i)
    CHECK(*same.rows[i].cost_per_driving_hour ==
          doctest::Approx(*nominal.rows[i].cost_per_driving_hour).epsilon(1e-12));

  // base = last period leaves the final month nominal
  const MonthlySeries rebased = cpi_adjust(nominal, rising, 2021, 12);
  CHECK(*rebased.rows[11].cost_per_driving_hour ==
        doctest::Approx(*nominal.rows[11].cost_per_driving_hour).epsilon(1e-12));

  CpiTable partial;
  partial.index[{2021, 1}] = 100;
  CHECK_THROWS_WITH_AS(cpi_adjust(nominal, partial, 2021, 1), doctest::Contains("2021-02"),
                       ConfigError);
}

TEST_CASE("regional distribution shares") {
  std::vector<TripRecord> trips = {
      money_trip(2019, 8, 600, 100, 32, 32),  // Central
      money_trip(2019, 8, 600, 100, 8, 32),   // Central
      money_trip(2019, 8, 600, 100, 25, 32),  // West
      money_trip(2019, 8, 600, 100, 40, 32),  // South
  };
  const RegionalShares t = regional_distribution(trips, default_map(), 2019);
  const auto& pickup = t.by_endpoint[0];
  REQUIRE(pickup.size() == 9);
  CHECK(pickup[0].region == "Central");
  CHECK(pickup[0].share_pct == doctest::Approx(50.0));
  double sum = 0;
  for (const auto& row : pickup) sum += row.share_pct;
  CHECK(sum == doctest::Approx(100.0).epsilon(1e-6));

  // all in one region
  std::vector<TripRecord> one = {money_trip(2019, 8, 600, 100, 76, 76)};
  const RegionalShares ta = regional_distribution(one, default_map(), 2019);
  CHECK(ta.by_endpoint[0].back().region == "Airport");
  CHECK(ta.by_endpoint[0].back().share_pct == doctest::Approx(100.0));

  // unknowns excluded from percentages, reported separately
  std::vector<TripRecord> with_unknown = {money_trip(2019, 8, 600, 100, 32, std::nullopt),
                                          money_trip(2019, 8, 600, 100, std::nullopt, 32)};
  const RegionalShares tu = regional_distribution(with_unknown, default_map(), 2019);
  CHECK(tu.unknown_trips[0] == 1);
  CHECK(tu.unknown_trips[1] == 1);
  CHECK(tu.by_endpoint[0][0].share_pct == doctest::Approx(100.0));

  CHECK_THROWS_AS(regional_distribution(trips, default_map(), 1999), DataError);
}

TEST_CASE("regional shares echo a weighted fixture") {
  // pickup weights per region, in region_order, summing to 100%
  const std::vector<std::pair<int, double>> weights = {
      {32, 30.50}, {1, 18.00}, {15, 6.19}, {25, 20.00}, {56, 7.00},
      {34, 9.00},  {70, 1.31}, {44, 5.00}, {76, 3.00},
  };
  std::vector<TripRecord> trips;
  for (const auto& [area, pct] : weights) {
    const auto n = static_cast<size_t>(pct * 100);  // 10000 trips total
    for (size_t i = 0; i < n; ++i) trips.push_back(money_trip(2019, 8, 600, 100, area, area));
  }
  REQUIRE(trips.size() == 10000);
  const RegionalShares t = regional_distribution(trips, default_map(), 2019);
  for (size_t r = 0; r < weights.size(); ++r) {
    CHECK(t.by_endpoint[0][r].share_pct == doctest::Approx(weights[r].second).epsilon(1e-9));
    CHECK(t.by_endpoint[1][r].share_pct == doctest::Approx(weights[r].second).epsilon(1e-9));
  }
}

TEST_CASE("regional cost per driving hour") {
  // one Airport pickup at $48.59 over half an hour
  std::vector<TripRecord> trips = {money_trip(2023, 8, 1800, 4859, 76, 32)};
  const RegionalRates t = regional_cost_per_hour(trips, default_map(), 2023);
  const auto& airport = t.by_endpoint[0].back();
  REQUIRE(airport.region == "Airport");
  REQUIRE(airport.cost_per_driving_hour.has_value());
  CHECK(std::abs(*airport.cost_per_driving_hour - 97.17) <= 0.011);

  // identical trips tagged to two regions earn identical rates
  std::vector<TripRecord> pair = {money_trip(2023, 8, 1800, 2000, 32, 32),
                                  money_trip(2023, 8, 1800, 2000, 25, 25)};
  const RegionalRates tp = regional_cost_per_hour(pair, default_map(), 2023);
  CHECK(*tp.by_endpoint[0][0].cost_per_driving_hour ==
        doctest::Approx(*tp.by_endpoint[0][3].cost_per_driving_hour));

  // hand-computed mixed fixture
  std::vector<TripRecord> mixed = {
      money_trip(2023, 8, 1800, 3000, 32, 32),  // Central: $30 / 0.5h
      money_trip(2023, 8, 3600, 1000, 32, 32),  // Central: $10 / 1h
      money_trip(2023, 8, 900, 2500, 25, 25),   // West: $25 / 0.25h
  };
  const RegionalRates tm = regional_cost_per_hour(mixed, default_map(), 2023);
  CHECK(*tm.by_endpoint[0][0].cost_per_driving_hour == doctest::Approx(40.0 / 1.5));
  CHECK(*tm.by_endpoint[0][3].cost_per_driving_hour == doctest::Approx(100.0));
  CHECK(!tm.by_endpoint[0][1].cost_per_driving_hour.has_value());  // North: zero hours -> null
}

TEST_CASE("ratio-of-sums equals mean-of-ratios when denominators are equal") {
  Rng rng(17);
  std::vector<TripRecord> trips;
  for (int i = 0; i < 50; ++i)
    trips.push_back(money_trip(2019, 3, 1800, static_cast<int64_t>(rng.bounded(9000)) + 100));
  const MonthlySeries s = monthly_cost_per_hour(trips);
  CHECK(*s.rows[0].cost_per_driving_hour ==
        doctest::Approx(*s.rows[0].cost_mean_of_ratios).epsilon(1e-12));
}

namespace {

std::vector<TripRecord> cluster_trips;

DriverRoute route_of(std::initializer_list<std::pair<int64_t, int64_t>> duration_and_total,
                     int hour = 10, std::optional<int> area = 32) {
  DriverRoute r;
  r.driver_id = 0;
  int offset = 0;
  for (const auto& [duration, total] : duration_and_total) {
    TripRecord t;
    t.start_ts = civil_seconds(2019, 8, 5, hour, 0, 0) + offset;
    t.end_ts = t.start_ts + duration;
    t.duration_s = duration;
    t.pickup_area = area;
    t.dropoff_area = area;
    t.fare_cents = total;
    t.total_cents = total;
    offset += 4000;
    r.trips.push_back(static_cast<TripIdx>(cluster_trips.size()));
    cluster_trips.push_back(std::move(t));
  }
  r.day = CivilDate{2019, 8, 5};
  return r;
}

}  // namespace

TEST_CASE("cluster report: mean of ratios with ratio-of-totals alongside") {
  cluster_trips.clear();
  // cluster 0: two routes with e_per_trip 10 and 20
  std::vector<DriverRoute> routes = {route_of({{1800, 1000}}), route_of({{1800, 2000}}),
                                     route_of({{900, 1500}, {900, 1500}})};
  std::vector<RouteMetrics> metrics;
  for (const auto& r : routes) metrics.push_back(route_metrics(r, cluster_trips));
  const std::vector<int> assignments = {0, 0, 1};

  const auto rows = cluster_report(routes, metrics, assignments, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].members == 2);
  CHECK(rows[0].e_per_trip == doctest::Approx(15.0));            // mean of 10 and 20
  CHECK(rows[0].e_per_trip_rot == doctest::Approx(30.0 / 2.0));  // happens to agree here
  CHECK(rows[0].total_income == doctest::Approx(15.0));          // mean per-route income

  // single-route cluster equals that route's metrics
  CHECK(rows[1].members == 1);
  CHECK(rows[1].mean_trips == doctest::Approx(2.0));
  CHECK(rows[1].e_per_trip == doctest::Approx(metrics[2].e_per_trip));
  CHECK(rows[1].e_per_drive_hr == doctest::Approx(metrics[2].e_per_drive_hr));
  CHECK(rows[1].est_e_per_hr == doctest::Approx(metrics[2].est_e_per_hr));

  // income conservation across clusters
  double conserved = 0;
  for (const auto& row : rows) conserved += static_cast<double>(row.members) * row.total_income;
  CHECK(conserved == doctest::Approx(15.0 * 2 + 30.0).epsilon(1e-9));

  const auto markers = report_markers(rows);
  CHECK(markers.at("e_per_trip").first == 0);   // cluster 0 highest (15 vs 15)... tie keeps first
  CHECK(markers.at("mean_trips").first == 1);
  CHECK(markers.at("mean_trips").second == 0);
}

TEST_CASE("temporal proportions per cluster") {
  cluster_trips.clear();
  std::vector<DriverRoute> routes = {route_of({{600, 100}, {600, 100}}, 22),
                                     route_of({{600, 100}}, 3)};
  const std::vector<int> assignments = {0, 1};
  const auto props = temporal_proportions(routes, cluster_trips, assignments, 2);
  REQUIRE(props.size() == 2);
  CHECK(props[0].shares[7] == doctest::Approx(1.0));  // all trips start at 22:xx
  CHECK(props[1].shares[1] == doctest::Approx(1.0));  // 03:xx
  double sum = 0;
  for (double s : props[0].shares) sum += s;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("regional proportions per cluster with unknown renormalization") {
  cluster_trips.clear();
  std::vector<DriverRoute> routes;
  {
    DriverRoute a = route_of({{600, 100}, {600, 100}, {600, 100}}, 10, 44);   // Far Southeast x3
    DriverRoute b = route_of({{600, 100}, {600, 100}}, 11, 40);               // South x2
    DriverRoute c = route_of({{600, 100}, {600, 100}, {600, 100}, {600, 100}, {600, 100}}, 12, 32);
    a.trips.insert(a.trips.end(), b.trips.begin(), b.trips.end());
    a.trips.insert(a.trips.end(), c.trips.begin(), c.trips.end());  // 10 trips: 3 FarSE, 2 South, 5 Central
    routes.push_back(a);
  }
  const std::vector<int> assignments = {0};
  const auto props = regional_proportions(routes, cluster_trips, assignments, 1, default_map());
  REQUIRE(props.size() == 1);
  const auto& pickup = props[0].by_endpoint[0];
  CHECK(pickup.shares[7] == doctest::Approx(0.3));  // Far Southeast
  CHECK(pickup.shares[5] == doctest::Approx(0.2));  // South
  CHECK(pickup.shares[0] == doctest::Approx(0.5));  // Central

  // one unknown among five: shares over the remaining four
  cluster_trips.clear();
  DriverRoute mixed = route_of({{600, 100}, {600, 100}, {600, 100}, {600, 100}}, 10, 76);
  DriverRoute unknown = route_of({{600, 100}}, 10, std::nullopt);
  mixed.trips.push_back(unknown.trips[0]);
  const auto p2 = regional_proportions(std::vector<DriverRoute>{mixed}, cluster_trips,
                                       std::vector<int>{0}, 1, default_map());
  CHECK(p2[0].by_endpoint[0].shares[8] == doctest::Approx(1.0));  // Airport over the known 4
  CHECK(p2[0].unknown_excluded[0] == 1);
}
