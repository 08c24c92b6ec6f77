#include "tripweave/features.hpp"

#include <algorithm>
#include <cmath>

#include "tripweave/errors.hpp"
#include "tripweave/money.hpp"

namespace tripweave {

RouteMetrics route_metrics(const DriverRoute& route, std::span<const TripRecord> trips) {
  RouteMetrics m;
  m.n_trips = route.trips.size();
  int64_t income_cents = 0, fare_cents = 0, driving_s = 0;
  for (TripIdx t : route.trips) {
    income_cents += trips[t].total_cents;
    fare_cents += trips[t].fare_cents;
    driving_s += trips[t].duration_s;
  }
  m.income_usd = cents_to_usd(income_cents);
  m.fares_usd = cents_to_usd(fare_cents);
  m.driving_hours = static_cast<double>(driving_s) / 3600.0;
  m.est_hours = m.driving_hours + kWaitHoursPerTrip * static_cast<double>(m.n_trips);
  m.e_per_trip = m.income_usd / static_cast<double>(m.n_trips);
  m.rates_defined = driving_s > 0;
  if (m.rates_defined) {
    m.e_per_drive_hr = m.income_usd / m.driving_hours;
    m.est_e_per_hr = estimated_hourly_rate(m.income_usd, m.driving_hours, static_cast<double>(m.n_trips));
  }
  return m;
}

std::vector<std::string> feature_names(const RegionMap& region_map, const FeatureOptions& options) {
  std::vector<std::string> names = {"n_trips",          "mean_fare",     "mean_tip",
                                    "mean_trip_total",  "mean_distance_mi", "driving_hours"};
  for (int b = 0; b < kTimeBins; ++b)
    names.push_back("start_" + std::to_string(b * 3) + "_" + std::to_string(b * 3 + 3));
  for (const auto& r : region_map.region_order()) names.push_back("pickup_share_" + r);
  if (options.include_dropoff_regions)
    for (const auto& r : region_map.region_order()) names.push_back("dropoff_share_" + r);
  return names;
}

namespace {

// Shares over region_order with Unknown dropped and the rest renormalized;
// false when every endpoint was Unknown.
bool region_shares(const DriverRoute& route, std::span<const TripRecord> trips, const RegionMap& map,
                   bool dropoff, std::vector<double>& out) {
  out.assign(map.region_count(), 0.0);
  size_t known = 0;
  for (TripIdx t : route.trips) {
    const auto area = dropoff ? trips[t].dropoff_area : trips[t].pickup_area;
    const int idx = map.region_index_or_unknown(area);
    if (idx < 0) continue;
    out[static_cast<size_t>(idx)] += 1.0;
    ++known;
  }
  if (known == 0) return false;
  for (double& v : out) v /= static_cast<double>(known);
  return true;
}

}  // namespace

std::optional<std::vector<double>> route_features(const DriverRoute& route,
                                                  std::span<const TripRecord> trips,
                                                  const RegionMap& region_map,
                                                  const FeatureOptions& options) {
  const size_t n = route.trips.size();
  if (n == 0) return std::nullopt;

  std::vector<double> pickup_shares;
  if (!region_shares(route, trips, region_map, /*dropoff=*/false, pickup_shares)) return std::nullopt;
  std::vector<double> dropoff_shares;
  if (options.include_dropoff_regions &&
      !region_shares(route, trips, region_map, /*dropoff=*/true, dropoff_shares))
    return std::nullopt;

  int64_t fare = 0, tip = 0, total = 0, driving_s = 0;
  double miles = 0;
  std::array<double, kTimeBins> bins{};
  for (TripIdx t : route.trips) {
    fare += trips[t].fare_cents;
    tip += trips[t].tip_cents;
    total += trips[t].total_cents;
    miles += trips[t].distance_mi;
    driving_s += trips[t].duration_s;
    bins[static_cast<size_t>(hour_of_day(trips[t].start_ts) / 3)] += 1.0;
  }

  std::vector<double> v;
  v.reserve(6 + kTimeBins + pickup_shares.size() + dropoff_shares.size());
  const auto dn = static_cast<double>(n);
  v.push_back(dn);
  v.push_back(cents_to_usd(fare) / dn);
  v.push_back(cents_to_usd(tip) / dn);
  v.push_back(cents_to_usd(total) / dn);
  v.push_back(miles / dn);
  v.push_back(static_cast<double>(driving_s) / 3600.0);
  for (double b : bins) v.push_back(b / dn);
  v.insert(v.end(), pickup_shares.begin(), pickup_shares.end());
  v.insert(v.end(), dropoff_shares.begin(), dropoff_shares.end());
  return v;
}

FeatureMatrix feature_matrix(std::span<const DriverRoute> routes, std::span<const TripRecord> trips,
                             const RegionMap& region_map, const FeatureOptions& options) {
  FeatureMatrix fm;
  fm.names = feature_names(region_map, options);
  std::vector<std::vector<double>> rows;
  rows.reserve(routes.size());
  for (const DriverRoute& r : routes) {
    auto v = route_features(r, trips, region_map, options);
    if (!v) {
      ++fm.rejected_all_unknown;
      continue;
    }
    rows.push_back(std::move(*v));
    fm.route_ids.push_back(r.driver_id);
  }
  fm.values = Matrix(rows.size(), fm.names.size());
  for (size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(), fm.values.row(i));
  return fm;
}

std::vector<DriverRoute> filter_active(std::vector<DriverRoute> routes, int min_trips) {
  std::erase_if(routes, [min_trips](const DriverRoute& r) {
    return r.trips.size() <= static_cast<size_t>(min_trips);
  });
  return routes;
}

std::vector<double> Standardization::apply(std::span<const double> row) const {
  std::vector<double> out(row.size());
  for (size_t c = 0; c < row.size(); ++c) out[c] = (row[c] - mean[c]) / sd[c];
  return out;
}

std::vector<double> Standardization::invert(std::span<const double> row) const {
  std::vector<double> out(row.size());
  for (size_t c = 0; c < row.size(); ++c) out[c] = row[c] * sd[c] + mean[c];
  return out;
}

std::pair<Matrix, Standardization> standardize(const Matrix& input) {
  if (input.rows == 0 || input.cols == 0) throw DataError("standardize: empty matrix");
  Standardization st;
  st.mean.assign(input.cols, 0.0);
  st.sd.assign(input.cols, 1.0);
  st.zero_variance.assign(input.cols, 0);

  for (size_t r = 0; r < input.rows; ++r)
    for (size_t c = 0; c < input.cols; ++c) st.mean[c] += input.at(r, c);
  for (double& m : st.mean) m /= static_cast<double>(input.rows);

  std::vector<double> var(input.cols, 0.0);
  for (size_t r = 0; r < input.rows; ++r) {
    for (size_t c = 0; c < input.cols; ++c) {
      const double d = input.at(r, c) - st.mean[c];
      var[c] += d * d;
    }
  }
  for (size_t c = 0; c < input.cols; ++c) {
    var[c] /= static_cast<double>(input.rows);  // population variance
    const double sd = std::sqrt(var[c]);
    if (sd > 0) {
      st.sd[c] = sd;
    } else {
      st.zero_variance[c] = 1;  // sd kept at 1 so the transform stays total
    }
  }

  Matrix out(input.rows, input.cols);
  for (size_t r = 0; r < input.rows; ++r)
    for (size_t c = 0; c < input.cols; ++c) out.at(r, c) = (input.at(r, c) - st.mean[c]) / st.sd[c];
  return {std::move(out), std::move(st)};
}

}  // namespace tripweave
