#include "tripweave/analytics.hpp"

#include <algorithm>
#include <fstream>

#include "tripweave/csv.hpp"
#include "tripweave/errors.hpp"
#include "tripweave/money.hpp"

namespace tripweave {

MonthlySeries monthly_cost_per_hour(std::span<const TripRecord> trips) {
  MonthlySeries series;
  if (trips.empty()) return series;

  struct Acc {
    uint64_t n = 0;
    int64_t total_cents = 0;
    int64_t driving_s = 0;
    double ratio_sum = 0;
  };
  std::map<std::pair<int, int>, Acc> by_month;
  auto key_min = std::make_pair(INT32_MAX, 0);
  auto key_max = std::make_pair(INT32_MIN, 0);

  for (const TripRecord& t : trips) {
    const CivilDate d = date_of(t.start_ts);
    const auto key = std::make_pair(d.year, d.month);
    key_min = std::min(key_min, key);
    key_max = std::max(key_max, key);
    if (t.duration_s <= 0) {
      ++series.zero_duration_excluded;
      continue;
    }
    Acc& a = by_month[key];
    ++a.n;
    a.total_cents += t.total_cents;
    a.driving_s += t.duration_s;
    a.ratio_sum += cents_to_usd(t.total_cents) / (static_cast<double>(t.duration_s) / 3600.0);
  }

  for (auto key = key_min; key <= key_max;) {
    MonthlyRow row;
    row.year = key.first;
    row.month = key.second;
    auto it = by_month.find(key);
    if (it != by_month.end() && it->second.n > 0) {
      const Acc& a = it->second;
      row.n_trips = a.n;
      row.total_usd = cents_to_usd(a.total_cents);
      row.total_driving_hours = static_cast<double>(a.driving_s) / 3600.0;
      row.cost_per_driving_hour = row.total_usd / row.total_driving_hours;
      row.cost_mean_of_ratios = a.ratio_sum / static_cast<double>(a.n);
    }
    series.rows.push_back(row);
    key = key.second == 12 ? std::make_pair(key.first + 1, 1) : std::make_pair(key.first, key.second + 1);
  }
  return series;
}

CpiTable CpiTable::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CPI table: " + path.string());
  CpiTable table;
  CsvReader reader(in);
  std::vector<std::string> row;
  bool first = true;
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 3) throw ConfigError("CPI table expects year,month,cpi rows");
    auto y = parse_int(row[0]);
    if (!y && first) {
      first = false;
      continue;  // header
    }
    first = false;
    auto m = parse_int(row[1]);
    auto v = parse_double(row[2]);
    if (!y || !m || !v || *m < 1 || *m > 12 || *v <= 0)
      throw ConfigError("CPI table: bad row for \"" + row[0] + "," + row[1] + "\"");
    table.index[{static_cast<int>(*y), static_cast<int>(*m)}] = *v;
  }
  return table;
}

double CpiTable::at(int year, int month) const {
  auto it = index.find({year, month});
  if (it == index.end()) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    throw ConfigError(std::string("CPI table is missing month ") + buf);
  }
  return it->second;
}

MonthlySeries cpi_adjust(const MonthlySeries& series, const CpiTable& cpi, int base_year,
                         int base_month) {
  const double base = cpi.at(base_year, base_month);
  MonthlySeries out = series;
  for (MonthlyRow& row : out.rows) {
    const double scale = base / cpi.at(row.year, row.month);
    if (row.cost_per_driving_hour) row.cost_per_driving_hour = *row.cost_per_driving_hour * scale;
    if (row.cost_mean_of_ratios) row.cost_mean_of_ratios = *row.cost_mean_of_ratios * scale;
    row.total_usd *= scale;
  }
  return out;
}

namespace {

std::optional<int> endpoint_area(const TripRecord& t, Endpoint e) {
  return e == Endpoint::pickup ? t.pickup_area : t.dropoff_area;
}

}  // namespace

RegionalShares regional_distribution(std::span<const TripRecord> trips, const RegionMap& region_map,
                                     int year) {
  RegionalShares out;
  out.year = year;
  const size_t nr = region_map.region_count();
  std::array<std::vector<uint64_t>, 2> counts = {std::vector<uint64_t>(nr, 0),
                                                 std::vector<uint64_t>(nr, 0)};
  std::array<uint64_t, 2> known = {0, 0};

  for (const TripRecord& t : trips) {
    if (date_of(t.start_ts).year != year) continue;
    for (int e = 0; e < 2; ++e) {
      const int idx = region_map.region_index_or_unknown(endpoint_area(t, static_cast<Endpoint>(e)));
      if (idx < 0) {
        ++out.unknown_trips[e];
      } else {
        ++counts[e][static_cast<size_t>(idx)];
        ++known[e];
      }
    }
  }
  if (known[0] == 0 && known[1] == 0)
    throw DataError("regional_distribution: no trips with a known endpoint in " + std::to_string(year));

  for (int e = 0; e < 2; ++e) {
    for (size_t r = 0; r < nr; ++r) {
      RegionShareRow row;
      row.region = region_map.region_order()[r];
      row.n_trips = counts[e][r];
      row.share_pct = known[e] ? 100.0 * static_cast<double>(counts[e][r]) / static_cast<double>(known[e])
                               : 0.0;
      out.by_endpoint[e].push_back(std::move(row));
    }
  }
  return out;
}

RegionalRates regional_cost_per_hour(std::span<const TripRecord> trips, const RegionMap& region_map,
                                     int year) {
  RegionalRates out;
  out.year = year;
  const size_t nr = region_map.region_count();
  struct Acc {
    uint64_t n = 0;
    int64_t total_cents = 0;
    int64_t driving_s = 0;
    double ratio_sum = 0;
  };
  std::array<std::vector<Acc>, 2> acc = {std::vector<Acc>(nr), std::vector<Acc>(nr)};

  for (const TripRecord& t : trips) {
    if (date_of(t.start_ts).year != year) continue;
    if (t.duration_s <= 0) {
      ++out.zero_duration_excluded;
      continue;
    }
    for (int e = 0; e < 2; ++e) {
      const int idx = region_map.region_index_or_unknown(endpoint_area(t, static_cast<Endpoint>(e)));
      if (idx < 0) {
        ++out.unknown_trips[e];
        continue;
      }
      Acc& a = acc[e][static_cast<size_t>(idx)];
      ++a.n;
      a.total_cents += t.total_cents;
      a.driving_s += t.duration_s;
      a.ratio_sum += cents_to_usd(t.total_cents) / (static_cast<double>(t.duration_s) / 3600.0);
    }
  }

  for (int e = 0; e < 2; ++e) {
    for (size_t r = 0; r < nr; ++r) {
      const Acc& a = acc[e][r];
      RegionRateRow row;
      row.region = region_map.region_order()[r];
      row.n_trips = a.n;
      row.total_usd = cents_to_usd(a.total_cents);
      row.driving_hours = static_cast<double>(a.driving_s) / 3600.0;
      if (a.driving_s > 0) {
        row.cost_per_driving_hour = row.total_usd / row.driving_hours;
        row.cost_mean_of_ratios = a.ratio_sum / static_cast<double>(a.n);
      }
      out.by_endpoint[e].push_back(std::move(row));
    }
  }
  return out;
}

std::vector<ClusterReportRow> cluster_report(std::span<const DriverRoute> routes,
                                             std::span<const RouteMetrics> metrics,
                                             std::span<const int> assignments, int k) {
  if (routes.size() != metrics.size() || routes.size() != assignments.size())
    throw DataError("cluster_report: routes/metrics/assignments size mismatch");

  struct Acc {
    uint64_t members = 0;
    uint64_t rated = 0;
    uint64_t rate_excluded = 0;
    double trips_sum = 0;
    double e_per_trip_sum = 0, e_per_drive_hr_sum = 0, est_e_per_hr_sum = 0;
    double fares_sum = 0, income_sum = 0;
    double total_trips = 0, total_driving_hours = 0, total_est_hours = 0;
  };
  std::vector<Acc> acc(static_cast<size_t>(k));

  for (size_t i = 0; i < routes.size(); ++i) {
    const int c = assignments[i];
    if (c < 0 || c >= k) throw DataError("cluster_report: assignment out of range");
    Acc& a = acc[static_cast<size_t>(c)];
    const RouteMetrics& m = metrics[i];
    ++a.members;
    a.trips_sum += static_cast<double>(m.n_trips);
    a.e_per_trip_sum += m.e_per_trip;
    a.fares_sum += m.fares_usd;
    a.income_sum += m.income_usd;
    a.total_trips += static_cast<double>(m.n_trips);
    a.total_driving_hours += m.driving_hours;
    a.total_est_hours += m.est_hours;
    if (m.rates_defined) {
      ++a.rated;
      a.e_per_drive_hr_sum += m.e_per_drive_hr;
      a.est_e_per_hr_sum += m.est_e_per_hr;
    } else {
      ++a.rate_excluded;
    }
  }

  std::vector<ClusterReportRow> rows;
  for (int c = 0; c < k; ++c) {
    const Acc& a = acc[static_cast<size_t>(c)];
    if (a.members == 0) continue;  // impossible for a valid ClusterModel
    ClusterReportRow row;
    row.cluster = c;
    row.members = a.members;
    const auto n = static_cast<double>(a.members);
    row.mean_trips = a.trips_sum / n;
    row.e_per_trip = a.e_per_trip_sum / n;
    row.total_fares = a.fares_sum / n;
    row.total_income = a.income_sum / n;
    row.rate_excluded_routes = a.rate_excluded;
    if (a.rated > 0) {
      row.e_per_drive_hr = a.e_per_drive_hr_sum / static_cast<double>(a.rated);
      row.est_e_per_hr = a.est_e_per_hr_sum / static_cast<double>(a.rated);
    }
    row.e_per_trip_rot = a.total_trips > 0 ? a.income_sum / a.total_trips : 0;
    row.e_per_drive_hr_rot = a.total_driving_hours > 0 ? a.income_sum / a.total_driving_hours : 0;
    row.est_e_per_hr_rot = a.total_est_hours > 0 ? a.income_sum / a.total_est_hours : 0;
    rows.push_back(row);
  }
  return rows;
}

std::map<std::string, std::pair<int, int>> report_markers(std::span<const ClusterReportRow> rows) {
  std::map<std::string, std::pair<int, int>> markers;
  if (rows.empty()) return markers;
  auto mark = [&](const std::string& name, auto getter) {
    int hi = rows[0].cluster, lo = rows[0].cluster;
    double hi_v = getter(rows[0]), lo_v = getter(rows[0]);
    for (const auto& r : rows) {
      const double v = getter(r);
      if (v > hi_v) {
        hi_v = v;
        hi = r.cluster;
      }
      if (v < lo_v) {
        lo_v = v;
        lo = r.cluster;
      }
    }
    markers[name] = {hi, lo};
  };
  mark("mean_trips", [](const ClusterReportRow& r) { return r.mean_trips; });
  mark("e_per_trip", [](const ClusterReportRow& r) { return r.e_per_trip; });
  mark("e_per_drive_hr", [](const ClusterReportRow& r) { return r.e_per_drive_hr; });
  mark("est_e_per_hr", [](const ClusterReportRow& r) { return r.est_e_per_hr; });
  mark("total_fares", [](const ClusterReportRow& r) { return r.total_fares; });
  mark("total_income", [](const ClusterReportRow& r) { return r.total_income; });
  return markers;
}

std::vector<ClusterProportions> temporal_proportions(std::span<const DriverRoute> routes,
                                                     std::span<const TripRecord> trips,
                                                     std::span<const int> assignments, int k) {
  if (routes.size() != assignments.size())
    throw DataError("temporal_proportions: assignment size mismatch");
  std::vector<ClusterProportions> out(static_cast<size_t>(k));
  for (int c = 0; c < k; ++c) {
    out[static_cast<size_t>(c)].cluster = c;
    out[static_cast<size_t>(c)].shares.assign(kTimeBins, 0.0);
  }
  for (size_t i = 0; i < routes.size(); ++i) {
    auto& p = out[static_cast<size_t>(assignments[i])];
    for (TripIdx t : routes[i].trips) {
      p.shares[static_cast<size_t>(hour_of_day(trips[t].start_ts) / 3)] += 1.0;
      ++p.trips;
    }
  }
  for (auto& p : out) {
    if (p.trips == 0) continue;
    for (double& s : p.shares) s /= static_cast<double>(p.trips);
  }
  return out;
}

std::vector<RegionalClusterProportions> regional_proportions(std::span<const DriverRoute> routes,
                                                             std::span<const TripRecord> trips,
                                                             std::span<const int> assignments, int k,
                                                             const RegionMap& region_map) {
  if (routes.size() != assignments.size())
    throw DataError("regional_proportions: assignment size mismatch");
  const size_t nr = region_map.region_count();
  std::vector<RegionalClusterProportions> out(static_cast<size_t>(k));
  for (int c = 0; c < k; ++c) {
    auto& p = out[static_cast<size_t>(c)];
    p.cluster = c;
    for (int e = 0; e < 2; ++e) {
      p.by_endpoint[e].cluster = c;
      p.by_endpoint[e].shares.assign(nr, 0.0);
    }
  }
  for (size_t i = 0; i < routes.size(); ++i) {
    auto& p = out[static_cast<size_t>(assignments[i])];
    for (TripIdx t : routes[i].trips) {
      for (int e = 0; e < 2; ++e) {
        const int idx =
            region_map.region_index_or_unknown(endpoint_area(trips[t], static_cast<Endpoint>(e)));
        if (idx < 0) {
          ++p.unknown_excluded[e];
          continue;
        }
        p.by_endpoint[e].shares[static_cast<size_t>(idx)] += 1.0;
        ++p.by_endpoint[e].trips;
      }
    }
  }
  for (auto& p : out) {
    for (int e = 0; e < 2; ++e) {
      if (p.by_endpoint[e].trips == 0) continue;
      for (double& s : p.by_endpoint[e].shares) s /= static_cast<double>(p.by_endpoint[e].trips);
    }
  }
  return out;
}

}  // namespace tripweave
