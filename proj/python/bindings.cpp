#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

#include "tripweave/analytics.hpp"
#include "tripweave/artifacts.hpp"
#include "tripweave/candidate_index.hpp"
#include "tripweave/clustering.hpp"
#include "tripweave/errors.hpp"
#include "tripweave/features.hpp"
#include "tripweave/geo.hpp"
#include "tripweave/ingest.hpp"
#include "tripweave/money.hpp"
#include "tripweave/synth.hpp"

namespace py = pybind11;
using namespace tripweave;

namespace {

Matrix matrix_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw DataError("expected a 2-D array");
  Matrix m(static_cast<size_t>(arr.shape(0)), static_cast<size_t>(arr.shape(1)));
  std::copy_n(arr.data(), m.data.size(), m.data.begin());
  return m;
}

py::array_t<double> array_from_matrix(const Matrix& m) {
  py::array_t<double> arr({m.rows, m.cols});
  std::copy_n(m.data.data(), m.data.size(), arr.mutable_data());
  return arr;
}

GeoPoint as_point(const std::pair<double, double>& latlon) {
  return GeoPoint{latlon.first, latlon.second};
}

SchemaConfig schema_for(const std::string& timestamp_format) {
  SchemaConfig schema;
  auto fmt = timestamp_format_from_name(timestamp_format);
  if (!fmt) throw ConfigError("unknown timestamp format: " + timestamp_format);
  schema.ts_format = *fmt;
  return schema;
}

py::dict stats_dict(const IngestStats& stats) {
  py::dict rejects;
  for (const auto& [reason, n] : stats.rejects_by_reason) rejects[py::str(reason)] = n;
  py::dict d;
  d["rows_read"] = stats.rows_read;
  d["rows_accepted"] = stats.rows_accepted;
  d["rejects_by_reason"] = rejects;
  return d;
}

}  // namespace

PYBIND11_MODULE(_tripweave, m) {
  m.doc() = "Trip-to-driver assignment simulation and earnings analytics";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  py::class_<TripRecord>(m, "TripRecord")
      .def(py::init([](std::string trip_id, const std::string& start, const std::string& end,
                       int64_t seconds, double miles, std::optional<int> pickup_area,
                       std::optional<int> dropoff_area,
                       std::optional<std::pair<double, double>> pickup_centroid,
                       std::optional<std::pair<double, double>> dropoff_centroid, double fare,
                       double tip, double extras, std::optional<double> total,
                       const std::string& timestamp_format) {
             TripRecord t;
             t.trip_id = std::move(trip_id);
             auto fmt = timestamp_format_from_name(timestamp_format);
             if (!fmt) throw ConfigError("unknown timestamp format: " + timestamp_format);
             auto s = parse_timestamp(start, *fmt);
             auto e = parse_timestamp(end, *fmt);
             if (!s || !e) throw DataError("unparseable timestamp");
             t.start_ts = *s;
             t.end_ts = *e;
             t.duration_s = seconds;
             t.distance_mi = miles;
             t.pickup_area = pickup_area;
             t.dropoff_area = dropoff_area;
             if (pickup_centroid) t.pickup_centroid = as_point(*pickup_centroid);
             if (dropoff_centroid) t.dropoff_centroid = as_point(*dropoff_centroid);
             t.fare_cents = std::llround(fare * 100);
             t.tip_cents = std::llround(tip * 100);
             t.extras_cents = std::llround(extras * 100);
             t.total_cents = total ? std::llround(*total * 100)
                                   : t.fare_cents + t.tip_cents + t.extras_cents;
             return t;
           }),
           py::arg("trip_id"), py::arg("start"), py::arg("end"), py::arg("seconds"),
           py::arg("miles") = 0.0, py::arg("pickup_area") = std::nullopt,
           py::arg("dropoff_area") = std::nullopt, py::arg("pickup_centroid") = std::nullopt,
           py::arg("dropoff_centroid") = std::nullopt, py::arg("fare") = 0.0, py::arg("tip") = 0.0,
           py::arg("extras") = 0.0, py::arg("total") = std::nullopt,
           py::arg("timestamp_format") = "iso_24h")
      .def_readonly("trip_id", &TripRecord::trip_id)
      .def_readonly("start_ts", &TripRecord::start_ts)
      .def_readonly("end_ts", &TripRecord::end_ts)
      .def_readonly("duration_s", &TripRecord::duration_s)
      .def_readonly("distance_mi", &TripRecord::distance_mi)
      .def_readonly("pickup_area", &TripRecord::pickup_area)
      .def_readonly("dropoff_area", &TripRecord::dropoff_area)
      .def_property_readonly("pickup_centroid",
                             [](const TripRecord& t) -> std::optional<std::pair<double, double>> {
                               if (!t.pickup_centroid) return std::nullopt;
                               return std::make_pair(t.pickup_centroid->lat, t.pickup_centroid->lon);
                             })
      .def_property_readonly("dropoff_centroid",
                             [](const TripRecord& t) -> std::optional<std::pair<double, double>> {
                               if (!t.dropoff_centroid) return std::nullopt;
                               return std::make_pair(t.dropoff_centroid->lat, t.dropoff_centroid->lon);
                             })
      .def_property_readonly("fare_usd", [](const TripRecord& t) { return cents_to_usd(t.fare_cents); })
      .def_property_readonly("tip_usd", [](const TripRecord& t) { return cents_to_usd(t.tip_cents); })
      .def_property_readonly("additional_charges_usd",
                             [](const TripRecord& t) { return cents_to_usd(t.extras_cents); })
      .def_property_readonly("trip_total_usd",
                             [](const TripRecord& t) { return cents_to_usd(t.total_cents); })
      .def_property_readonly("start",
                             [](const TripRecord& t) {
                               return format_timestamp(t.start_ts, TimestampFormat::iso_24h);
                             })
      .def("__repr__", [](const TripRecord& t) {
        return "TripRecord(" + t.trip_id + ", " +
               format_timestamp(t.start_ts, TimestampFormat::iso_24h) + ")";
      });

  py::class_<IngestStats>(m, "IngestStats")
      .def_readonly("rows_read", &IngestStats::rows_read)
      .def_readonly("rows_accepted", &IngestStats::rows_accepted)
      .def_property_readonly("rejects_by_reason", [](const IngestStats& s) {
        py::dict d;
        for (const auto& [reason, n] : s.rejects_by_reason) d[py::str(reason)] = n;
        return d;
      });

  m.def(
      "parse_trips_csv",
      [](const std::filesystem::path& path, bool require_geography,
         const std::string& timestamp_format) {
        ParseOptions options;
        options.require_geography = require_geography;
        auto [trips, stats] = parse_trips_file(path, schema_for(timestamp_format), options);
        return py::make_tuple(std::move(trips), stats);
      },
      py::arg("path"), py::arg("require_geography") = false, py::arg("timestamp_format") = "us_12h",
      "Parse a Chicago-TNP-schema trips CSV; returns (trips, IngestStats).");

  m.def(
      "write_trips_csv",
      [](const std::filesystem::path& path, const std::vector<TripRecord>& trips,
         const std::string& timestamp_format) {
        std::ofstream out(path);
        if (!out) throw DataError("cannot write " + path.string());
        write_trips_csv(out, trips, schema_for(timestamp_format));
      },
      py::arg("path"), py::arg("trips"), py::arg("timestamp_format") = "us_12h");

  py::class_<RegionMap>(m, "RegionMap")
      .def_property_readonly("region_order", &RegionMap::region_order)
      .def("name_of", [](const RegionMap& map, std::optional<int> area) {
        return std::string(map_area_to_region(area, map));
      });
  m.def("load_region_map", &load_region_map, py::arg("path"));

  m.def(
      "haversine_miles",
      [](const std::pair<double, double>& a, const std::pair<double, double>& b) {
        return haversine_miles(as_point(a), as_point(b));
      },
      py::arg("a"), py::arg("b"), "Great-circle distance in miles between (lat, lon) pairs.");

  m.def(
      "query_candidates",
      [](const std::vector<TripRecord>& trips, const std::pair<double, double>& dropoff,
         const std::string& end_ts, double alpha_hours, double max_dist_mi) {
        auto end = parse_timestamp(end_ts, TimestampFormat::iso_24h);
        if (!end) throw DataError("unparseable end_ts");
        CandidateIndex index(trips);
        return index.query_candidates(as_point(dropoff), *end, alpha_hours, max_dist_mi);
      },
      py::arg("trips"), py::arg("dropoff"), py::arg("end_ts"), py::arg("alpha_hours") = 0.25,
      py::arg("max_dist_mi") = 1.0,
      "Trips starting within [end_ts, end_ts+alpha] whose pickup is within max_dist of dropoff.");

  py::class_<SimParams>(m, "SimParams")
      .def(py::init([](double alpha_hours, double max_dist_mi, int max_trips,
                       double max_session_hours, int top_k, uint64_t seed, bool partition_by_day,
                       int threads) {
             SimParams p;
             p.alpha_hours = alpha_hours;
             p.max_dist_mi = max_dist_mi;
             p.max_trips = max_trips;
             p.max_session_hours = max_session_hours;
             p.top_k = top_k;
             p.seed = seed;
             p.partition_by_day = partition_by_day;
             p.threads = threads;
             p.validate();
             return p;
           }),
           py::arg("alpha_hours") = 0.25, py::arg("max_dist_mi") = 1.0, py::arg("max_trips") = 25,
           py::arg("max_session_hours") = 8.0, py::arg("top_k") = 10, py::arg("seed") = 0,
           py::arg("partition_by_day") = true, py::arg("threads") = 0)
      .def_readwrite("alpha_hours", &SimParams::alpha_hours)
      .def_readwrite("max_dist_mi", &SimParams::max_dist_mi)
      .def_readwrite("max_trips", &SimParams::max_trips)
      .def_readwrite("max_session_hours", &SimParams::max_session_hours)
      .def_readwrite("top_k", &SimParams::top_k)
      .def_readwrite("seed", &SimParams::seed)
      .def_readwrite("partition_by_day", &SimParams::partition_by_day);

  py::class_<DriverRoute>(m, "DriverRoute")
      .def_readonly("driver_id", &DriverRoute::driver_id)
      .def_readonly("trips", &DriverRoute::trips)
      .def_property_readonly("day", [](const DriverRoute& r) { return format_date(r.day); })
      .def_property_readonly("income_usd",
                             [](const DriverRoute& r) { return cents_to_usd(r.income_cents); })
      .def_property_readonly("driving_hours",
                             [](const DriverRoute& r) { return r.driving_seconds / 3600.0; })
      .def("__len__", [](const DriverRoute& r) { return r.trips.size(); });

  py::class_<SimOutput>(m, "SimOutput")
      .def_readonly("routes", &SimOutput::routes)
      .def_property_readonly("stats", [](const SimOutput& o) {
        py::dict hist;
        for (const auto& [len, n] : o.stats.route_length_hist) hist[py::int_(len)] = n;
        py::dict d;
        d["total_drivers"] = o.stats.total_drivers;
        d["singleton_routes"] = o.stats.singleton_routes;
        d["partitions"] = o.stats.partitions;
        d["route_length_hist"] = hist;
        return d;
      });

  m.def(
      "simulate",
      [](const std::vector<TripRecord>& trips, const SimParams& params) {
        return simulate(trips, params);
      },
      py::arg("trips"), py::arg("params"),
      "Assign every trip to exactly one hypothetical driver route.");

  m.def(
      "validate_routes",
      [](const SimOutput& output, const std::vector<TripRecord>& trips, const SimParams& params) {
        const ValidationReport r = validate_routes(output, trips, params);
        py::dict d;
        d["ok"] = r.ok;
        d["partition_ok"] = r.partition_ok;
        d["violations"] = r.violations.size();
        d["message"] = r.message;
        return d;
      },
      py::arg("output"), py::arg("trips"), py::arg("params"));

  m.def(
      "check_extension",
      [](const DriverRoute& route, const std::vector<TripRecord>& trips, TripIdx candidate,
         const SimParams& params) {
        const ExtensionCheck c = check_extension(route, trips, candidate, params);
        return py::make_tuple(c.feasible, std::string(constraint_name(c.violated)));
      },
      py::arg("route"), py::arg("trips"), py::arg("candidate"), py::arg("params"));

  py::class_<RouteMetrics>(m, "RouteMetrics")
      .def_readonly("n_trips", &RouteMetrics::n_trips)
      .def_readonly("income_usd", &RouteMetrics::income_usd)
      .def_readonly("fares_usd", &RouteMetrics::fares_usd)
      .def_readonly("driving_hours", &RouteMetrics::driving_hours)
      .def_readonly("est_hours", &RouteMetrics::est_hours)
      .def_readonly("e_per_trip", &RouteMetrics::e_per_trip)
      .def_readonly("e_per_drive_hr", &RouteMetrics::e_per_drive_hr)
      .def_readonly("est_e_per_hr", &RouteMetrics::est_e_per_hr)
      .def_readonly("rates_defined", &RouteMetrics::rates_defined);

  m.def(
      "route_metrics",
      [](const DriverRoute& route, const std::vector<TripRecord>& trips) {
        return route_metrics(route, trips);
      },
      py::arg("route"), py::arg("trips"));

  m.def(
      "filter_active",
      [](std::vector<DriverRoute> routes, int min_trips) {
        return filter_active(std::move(routes), min_trips);
      },
      py::arg("routes"), py::arg("min_trips") = 2,
      "Keep routes with strictly more than min_trips trips.");

  m.def(
      "feature_matrix",
      [](const std::vector<DriverRoute>& routes, const std::vector<TripRecord>& trips,
         const RegionMap& region_map, bool include_dropoff_regions) {
        FeatureOptions options;
        options.include_dropoff_regions = include_dropoff_regions;
        FeatureMatrix fm = feature_matrix(routes, trips, region_map, options);
        return py::make_tuple(array_from_matrix(fm.values), fm.names, fm.route_ids,
                              fm.rejected_all_unknown);
      },
      py::arg("routes"), py::arg("trips"), py::arg("region_map"),
      py::arg("include_dropoff_regions") = false,
      "Returns (values, feature_names, route_ids, rejected_all_unknown).");

  m.def(
      "standardize",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
        auto [out, st] = standardize(matrix_from_array(arr));
        return py::make_tuple(array_from_matrix(out), st.mean, st.sd,
                              std::vector<int>(st.zero_variance.begin(), st.zero_variance.end()));
      },
      py::arg("matrix"), "Column z-score; returns (matrix, mean, sd, zero_variance_flags).");

  py::class_<ClusterModel>(m, "ClusterModel")
      .def_readonly("k", &ClusterModel::k)
      .def_readonly("assignments", &ClusterModel::assignments)
      .def_readonly("inertia", &ClusterModel::inertia)
      .def_readonly("seed", &ClusterModel::seed)
      .def_property_readonly("centroids",
                             [](const ClusterModel& m_) { return array_from_matrix(m_.centroids); });

  m.def(
      "kmeans",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points, int k,
         uint64_t seed, int n_restarts, int max_iter, double tol) {
        KMeansOptions options;
        options.n_restarts = n_restarts;
        options.max_iter = max_iter;
        options.tol = tol;
        return kmeans(matrix_from_array(points), k, seed, options);
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("n_restarts") = 10,
      py::arg("max_iter") = 300, py::arg("tol") = 1e-4);

  m.def(
      "silhouette",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
         const std::vector<int>& assignments, size_t subsample_size, uint64_t seed) {
        return silhouette(matrix_from_array(points), assignments, subsample_size, seed);
      },
      py::arg("points"), py::arg("assignments"), py::arg("subsample_size") = 10000,
      py::arg("seed") = 0);

  m.def(
      "select_k",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points, int k_min,
         int k_max, uint64_t seed, size_t silhouette_subsample) {
        SelectKOptions options;
        options.silhouette_subsample = silhouette_subsample;
        auto [model, report] = select_k(matrix_from_array(points), k_min, k_max, seed, options);
        py::dict rep;
        py::dict scores;
        for (const auto& [k, s] : report.scores) scores[py::int_(k)] = s;
        rep["scores"] = scores;
        rep["best_k"] = report.best_k;
        rep["subsample_size"] = report.subsample_size;
        rep["subsample_seed"] = report.subsample_seed;
        return py::make_tuple(std::move(model), rep);
      },
      py::arg("points"), py::arg("k_min") = 4, py::arg("k_max") = 16, py::arg("seed") = 0,
      py::arg("silhouette_subsample") = 10000);

  m.def(
      "monthly_cost_per_hour",
      [](const std::vector<TripRecord>& trips) {
        const MonthlySeries series = monthly_cost_per_hour(trips);
        py::list rows;
        for (const auto& r : series.rows) {
          py::dict d;
          d["year"] = r.year;
          d["month"] = r.month;
          d["n_trips"] = r.n_trips;
          d["total_usd"] = r.total_usd;
          d["total_driving_hours"] = r.total_driving_hours;
          d["cost_per_driving_hour"] =
              r.cost_per_driving_hour ? py::object(py::float_(*r.cost_per_driving_hour)) : py::none();
          d["cost_mean_of_ratios"] =
              r.cost_mean_of_ratios ? py::object(py::float_(*r.cost_mean_of_ratios)) : py::none();
          rows.append(d);
        }
        return rows;
      },
      py::arg("trips"));

  m.def(
      "regional_distribution",
      [](const std::vector<TripRecord>& trips, const RegionMap& region_map, int year) {
        const RegionalShares t = regional_distribution(trips, region_map, year);
        py::dict d;
        for (int e = 0; e < 2; ++e) {
          py::list rows;
          for (const auto& r : t.by_endpoint[e]) {
            py::dict row;
            row["region"] = r.region;
            row["n_trips"] = r.n_trips;
            row["share_pct"] = r.share_pct;
            rows.append(row);
          }
          d[kEndpointNames[static_cast<size_t>(e)]] = rows;
          d[py::str(std::string(kEndpointNames[static_cast<size_t>(e)]) + "_unknown")] =
              t.unknown_trips[static_cast<size_t>(e)];
        }
        return d;
      },
      py::arg("trips"), py::arg("region_map"), py::arg("year"));

  m.def(
      "regional_cost_per_hour",
      [](const std::vector<TripRecord>& trips, const RegionMap& region_map, int year) {
        const RegionalRates t = regional_cost_per_hour(trips, region_map, year);
        py::dict d;
        for (int e = 0; e < 2; ++e) {
          py::list rows;
          for (const auto& r : t.by_endpoint[e]) {
            py::dict row;
            row["region"] = r.region;
            row["n_trips"] = r.n_trips;
            row["total_usd"] = r.total_usd;
            row["driving_hours"] = r.driving_hours;
            row["cost_per_driving_hour"] = r.cost_per_driving_hour
                                               ? py::object(py::float_(*r.cost_per_driving_hour))
                                               : py::none();
            rows.append(row);
          }
          d[kEndpointNames[static_cast<size_t>(e)]] = rows;
        }
        return d;
      },
      py::arg("trips"), py::arg("region_map"), py::arg("year"));

  m.def(
      "cluster_report",
      [](const std::vector<DriverRoute>& routes, const std::vector<TripRecord>& trips,
         const std::vector<int>& assignments, int k) {
        std::vector<RouteMetrics> metrics;
        metrics.reserve(routes.size());
        for (const auto& r : routes) metrics.push_back(route_metrics(r, trips));
        py::list rows;
        for (const auto& r : cluster_report(routes, metrics, assignments, k)) {
          py::dict d;
          d["cluster"] = r.cluster;
          d["members"] = r.members;
          d["mean_trips"] = r.mean_trips;
          d["e_per_trip"] = r.e_per_trip;
          d["e_per_drive_hr"] = r.e_per_drive_hr;
          d["est_e_per_hr"] = r.est_e_per_hr;
          d["total_fares"] = r.total_fares;
          d["total_income"] = r.total_income;
          d["e_per_trip_rot"] = r.e_per_trip_rot;
          d["e_per_drive_hr_rot"] = r.e_per_drive_hr_rot;
          d["est_e_per_hr_rot"] = r.est_e_per_hr_rot;
          rows.append(d);
        }
        return rows;
      },
      py::arg("routes"), py::arg("trips"), py::arg("assignments"), py::arg("k"));

  m.def(
      "temporal_proportions",
      [](const std::vector<DriverRoute>& routes, const std::vector<TripRecord>& trips,
         const std::vector<int>& assignments, int k) {
        py::list out;
        for (const auto& p : temporal_proportions(routes, trips, assignments, k)) {
          py::dict d;
          d["cluster"] = p.cluster;
          d["trips"] = p.trips;
          d["shares"] = p.shares;
          out.append(d);
        }
        return out;
      },
      py::arg("routes"), py::arg("trips"), py::arg("assignments"), py::arg("k"));

  py::class_<SynthParams>(m, "SynthParams")
      .def(py::init([](int n_drivers, int trips_min, int trips_max, bool isolation_mode,
                       uint64_t seed, int n_days, double gap_minutes_max, double jump_miles_max) {
             SynthParams p;
             p.n_drivers = n_drivers;
             p.trips_min = trips_min;
             p.trips_max = trips_max;
             p.isolation_mode = isolation_mode;
             p.seed = seed;
             p.n_days = n_days;
             p.gap_minutes_max = gap_minutes_max;
             p.jump_miles_max = jump_miles_max;
             p.validate();
             return p;
           }),
           py::arg("n_drivers") = 100, py::arg("trips_min") = 1, py::arg("trips_max") = 25,
           py::arg("isolation_mode") = false, py::arg("seed") = 0, py::arg("n_days") = 1,
           py::arg("gap_minutes_max") = 15.0, py::arg("jump_miles_max") = 0.8)
      .def_readwrite("n_drivers", &SynthParams::n_drivers)
      .def_readwrite("isolation_mode", &SynthParams::isolation_mode)
      .def_readwrite("seed", &SynthParams::seed);

  m.def(
      "synth_generate",
      [](const SynthParams& params) {
        SynthOutput out = generate(params);
        return py::make_tuple(std::move(out.trips), std::move(out.truth));
      },
      py::arg("params"), "Returns (trips, truth_routes).");

  py::class_<ReconstructionScore>(m, "ReconstructionScore")
      .def_readonly("pair_precision", &ReconstructionScore::pair_precision)
      .def_readonly("pair_recall", &ReconstructionScore::pair_recall)
      .def_readonly("pair_f1", &ReconstructionScore::pair_f1)
      .def_readonly("exact_partition", &ReconstructionScore::exact_partition)
      .def_readonly("route_count_delta", &ReconstructionScore::route_count_delta);

  m.def(
      "score_routes",
      [](const std::vector<std::vector<TripIdx>>& truth,
         const std::vector<std::vector<TripIdx>>& predicted) { return score(truth, predicted); },
      py::arg("truth"), py::arg("predicted"),
      "Link-level precision/recall between two route sets over the same trips.");
}
