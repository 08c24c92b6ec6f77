#include "tripweave/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <set>
#include <unordered_map>

#include "tripweave/artifacts.hpp"
#include "tripweave/csv.hpp"
#include "tripweave/errors.hpp"

namespace tripweave {

namespace {

using ordered_json = nlohmann::ordered_json;

const ordered_json* find_key(const ordered_json& root, const std::string& dotted) {
  const ordered_json* node = &root;
  size_t pos = 0;
  while (pos < dotted.size()) {
    const size_t dot = dotted.find('.', pos);
    const std::string key = dotted.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (!node->is_object() || !node->contains(key)) return nullptr;
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return node;
}

void set_key(ordered_json& root, const std::string& dotted, ordered_json value) {
  ordered_json* node = &root;
  size_t pos = 0;
  while (true) {
    const size_t dot = dotted.find('.', pos);
    const std::string key = dotted.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = ordered_json::object();
    node = &(*node)[key];
    pos = dot + 1;
  }
}

template <typename T>
T get_or(const ordered_json& root, const std::string& dotted, T fallback) {
  const ordered_json* node = find_key(root, dotted);
  if (node == nullptr || node->is_null()) return fallback;
  try {
    return node->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config field \"" + dotted + "\" has the wrong type");
  }
}

std::string require_string(const ordered_json& root, const std::string& dotted) {
  const ordered_json* node = find_key(root, dotted);
  if (node == nullptr || node->is_null() || !node->is_string() || node->get<std::string>().empty())
    throw ConfigError("config field \"" + dotted + "\" is required");
  return node->get<std::string>();
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct LoadedTrips {
  std::vector<TripRecord> trips;
  IngestStats stats;
};

SchemaConfig schema_from_config(const RunConfig& cfg) {
  SchemaConfig s;
  const std::string fmt = get_or<std::string>(cfg.effective, "ingest.timestamp_format", "us_12h");
  auto parsed = timestamp_format_from_name(fmt);
  if (!parsed) throw ConfigError("ingest.timestamp_format: unknown format \"" + fmt + "\"");
  s.ts_format = *parsed;
  if (const ordered_json* cols = find_key(cfg.effective, "ingest.columns"); cols && cols->is_object()) {
    auto put = [&](const char* key, std::string& dest) {
      if (cols->contains(key)) dest = (*cols)[key].get<std::string>();
    };
    put("trip_id", s.trip_id);
    put("start_ts", s.start_ts);
    put("end_ts", s.end_ts);
    put("seconds", s.seconds);
    put("miles", s.miles);
    put("pickup_area", s.pickup_area);
    put("dropoff_area", s.dropoff_area);
    put("pickup_lat", s.pickup_lat);
    put("pickup_lon", s.pickup_lon);
    put("dropoff_lat", s.dropoff_lat);
    put("dropoff_lon", s.dropoff_lon);
    put("fare", s.fare);
    put("tip", s.tip);
    put("extras", s.extras);
    put("total", s.total);
  }
  return s;
}

SimParams sim_params_from_config(const RunConfig& cfg) {
  SimParams p;
  p.alpha_hours = get_or<double>(cfg.effective, "sim.alpha_hours", p.alpha_hours);
  p.max_dist_mi = get_or<double>(cfg.effective, "sim.max_dist_mi", p.max_dist_mi);
  p.max_trips = get_or<int>(cfg.effective, "sim.max_trips", p.max_trips);
  p.max_session_hours = get_or<double>(cfg.effective, "sim.max_session_hours", p.max_session_hours);
  p.top_k = get_or<int>(cfg.effective, "sim.top_k", p.top_k);
  p.partition_by_day = get_or<bool>(cfg.effective, "sim.partition_by_day", p.partition_by_day);
  p.bucket_minutes = get_or<double>(cfg.effective, "sim.bucket_minutes", p.bucket_minutes);
  p.cell_miles = get_or<double>(cfg.effective, "sim.cell_miles", p.cell_miles);
  p.threads = get_or<int>(cfg.effective, "sim.threads", 0);
  if (p.threads == 0) {
    if (const char* env = std::getenv("TRIPWEAVE_THREADS")) p.threads = std::atoi(env);
  }
  p.seed = cfg.seed;

  const std::string mode = get_or<std::string>(cfg.effective, "distance_mode", "centroid");
  if (mode != "centroid")
    throw ConfigError("distance_mode \"" + mode + "\" is reserved; only \"centroid\" is implemented");
  p.validate();
  return p;
}

SynthParams synth_params_from_config(const RunConfig& cfg) {
  SynthParams p;
  const auto& j = cfg.effective;
  p.n_drivers = get_or<int>(j, "synth.n_drivers", p.n_drivers);
  p.trips_min = get_or<int>(j, "synth.trips_min", p.trips_min);
  p.trips_max = get_or<int>(j, "synth.trips_max", p.trips_max);
  p.gap_minutes_min = get_or<double>(j, "synth.gap_minutes_min", p.gap_minutes_min);
  p.gap_minutes_max = get_or<double>(j, "synth.gap_minutes_max", p.gap_minutes_max);
  p.jump_miles_min = get_or<double>(j, "synth.jump_miles_min", p.jump_miles_min);
  p.jump_miles_max = get_or<double>(j, "synth.jump_miles_max", p.jump_miles_max);
  p.duration_minutes_min = get_or<double>(j, "synth.duration_minutes_min", p.duration_minutes_min);
  p.duration_minutes_max = get_or<double>(j, "synth.duration_minutes_max", p.duration_minutes_max);
  p.fare_base_usd = get_or<double>(j, "synth.fare_base_usd", p.fare_base_usd);
  p.fare_per_mile_usd = get_or<double>(j, "synth.fare_per_mile_usd", p.fare_per_mile_usd);
  p.fare_per_minute_usd = get_or<double>(j, "synth.fare_per_minute_usd", p.fare_per_minute_usd);
  p.tip_rate_max = get_or<double>(j, "synth.tip_rate_max", p.tip_rate_max);
  p.extras_max_usd = get_or<double>(j, "synth.extras_max_usd", p.extras_max_usd);
  p.n_centers = get_or<int>(j, "synth.n_centers", p.n_centers);
  p.scatter_miles = get_or<double>(j, "synth.scatter_miles", p.scatter_miles);
  p.isolation_mode = get_or<bool>(j, "synth.isolation_mode", p.isolation_mode);
  p.n_days = get_or<int>(j, "synth.n_days", p.n_days);
  if (const ordered_json* day = find_key(j, "synth.start_day"); day && day->is_string()) {
    auto d = parse_date(day->get<std::string>());
    if (!d) throw ConfigError("synth.start_day: expected YYYY-MM-DD");
    p.start_day = *d;
  }
  p.alpha_hours = get_or<double>(j, "sim.alpha_hours", p.alpha_hours);
  p.max_dist_mi = get_or<double>(j, "sim.max_dist_mi", p.max_dist_mi);
  p.max_trips = get_or<int>(j, "sim.max_trips", p.max_trips);
  p.max_session_hours = get_or<double>(j, "sim.max_session_hours", p.max_session_hours);
  p.seed = cfg.seed;
  return p;
}

LoadedTrips load_trips(const RunConfig& cfg, bool require_geography) {
  const std::filesystem::path path = cfg.resolve(require_string(cfg.effective, "input"));
  if (!std::filesystem::exists(path)) throw ConfigError("input does not exist: " + path.string());
  const SchemaConfig schema = schema_from_config(cfg);
  ParseOptions options;
  options.require_geography =
      require_geography || get_or<bool>(cfg.effective, "ingest.require_geography", false);

  std::optional<int64_t> from_day, to_day;
  if (const ordered_json* v = find_key(cfg.effective, "filters.date_from"); v && v->is_string()) {
    auto d = parse_date(v->get<std::string>());
    if (!d) throw ConfigError("filters.date_from: expected YYYY-MM-DD");
    from_day = days_from_civil(d->year, d->month, d->day);
  }
  if (const ordered_json* v = find_key(cfg.effective, "filters.date_to"); v && v->is_string()) {
    auto d = parse_date(v->get<std::string>());
    if (!d) throw ConfigError("filters.date_to: expected YYYY-MM-DD");
    to_day = days_from_civil(d->year, d->month, d->day);
  }

  LoadedTrips loaded;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input: " + path.string());
  for_each_trip(in, schema, options, loaded.stats, [&](TripRecord&& t) {
    const int64_t day = epoch_day(t.start_ts);
    if (from_day && day < *from_day) return;
    if (to_day && day > *to_day) return;
    loaded.trips.push_back(std::move(t));
  });
  if (loaded.trips.empty()) throw DataError("no trips after parsing/filtering " + path.string());
  return loaded;
}

RegionMap load_region(const RunConfig& cfg) {
  return load_region_map(cfg.resolve(require_string(cfg.effective, "region_map")));
}

// Rebuilds route structs from a routes CSV against the given trip vector.
std::vector<DriverRoute> routes_from_csv(const std::filesystem::path& path,
                                         std::span<const TripRecord> trips) {
  std::unordered_map<std::string, TripIdx> by_id;
  by_id.reserve(trips.size());
  for (size_t i = 0; i < trips.size(); ++i) {
    if (!by_id.emplace(trips[i].trip_id, static_cast<TripIdx>(i)).second)
      throw DataError("duplicate trip id in input: " + trips[i].trip_id);
  }
  std::vector<DriverRoute> routes;
  uint32_t next_id = 0;
  for (const auto& seq : read_routes_csv(path)) {
    DriverRoute r;
    r.driver_id = next_id++;
    for (const std::string& id : seq) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw DataError("routes file references unknown trip id: " + id);
      r.trips.push_back(it->second);
      r.income_cents += trips[it->second].total_cents;
      r.fare_cents += trips[it->second].fare_cents;
      r.driving_seconds += trips[it->second].duration_s;
    }
    if (r.trips.empty()) throw DataError("empty route in " + path.string());
    r.day = date_of(trips[r.trips.front()].start_ts);
    routes.push_back(std::move(r));
  }
  return routes;
}

std::vector<TripRecord> centroid_complete(std::vector<TripRecord> trips, uint64_t& dropped) {
  std::vector<TripRecord> out;
  out.reserve(trips.size());
  for (auto& t : trips) {
    if (t.pickup_centroid && t.dropoff_centroid) out.push_back(std::move(t));
    else ++dropped;
  }
  return out;
}

std::vector<int> years_of(std::span<const TripRecord> trips, bool include_2018) {
  std::set<int> years;
  for (const auto& t : trips) years.insert(date_of(t.start_ts).year);
  if (!include_2018) years.erase(2018);
  return {years.begin(), years.end()};
}

struct StageContext {
  const RunConfig& cfg;
  std::vector<std::pair<std::string, std::string>> artifacts;  // name -> content
  ordered_json counters = ordered_json::object();

  void emit(const std::string& name, std::string content) {
    artifacts.emplace_back(name, std::move(content));
  }
};

void stage_ingest(StageContext& ctx) {
  LoadedTrips loaded = load_trips(ctx.cfg, false);
  std::ostringstream out;
  write_trips_csv(out, loaded.trips, schema_from_config(ctx.cfg));
  ctx.emit("trips_normalized.csv", out.str());
  ctx.emit("ingest_stats.json", ingest_stats_json(loaded.stats));
  ctx.counters["rows_read"] = loaded.stats.rows_read;
  ctx.counters["rows_accepted"] = loaded.stats.rows_accepted;
  ctx.counters["rows_kept"] = loaded.trips.size();
}

void stage_monthly(StageContext& ctx, LoadedTrips* preloaded = nullptr) {
  LoadedTrips local;
  if (preloaded == nullptr) {
    local = load_trips(ctx.cfg, false);
    preloaded = &local;
  }
  const MonthlySeries series = monthly_cost_per_hour(preloaded->trips);
  ctx.emit("monthly.csv", monthly_csv(series));
  ctx.counters["monthly_rows"] = series.rows.size();
  ctx.counters["zero_duration_excluded"] = series.zero_duration_excluded;

  const std::string cpi_path = get_or<std::string>(ctx.cfg.effective, "monthly.cpi_table", "");
  if (!cpi_path.empty()) {
    const CpiTable cpi = CpiTable::from_csv(ctx.cfg.resolve(cpi_path));
    const std::string base = get_or<std::string>(ctx.cfg.effective, "monthly.cpi_base", "");
    auto dash = base.find('-');
    auto y = parse_int(base.substr(0, dash));
    auto m = dash == std::string::npos ? std::nullopt : parse_int(base.substr(dash + 1));
    if (!y || !m) throw ConfigError("monthly.cpi_base: expected YYYY-MM");
    ctx.emit("monthly_real.csv",
             monthly_csv(cpi_adjust(series, cpi, static_cast<int>(*y), static_cast<int>(*m))));
  }
}

void stage_regional(StageContext& ctx, LoadedTrips* preloaded = nullptr) {
  LoadedTrips local;
  if (preloaded == nullptr) {
    local = load_trips(ctx.cfg, false);
    preloaded = &local;
  }
  const RegionMap region_map = load_region(ctx.cfg);
  const bool include_2018 = get_or<bool>(ctx.cfg.effective, "filters.include_2018", false);
  std::vector<RegionalShares> shares;
  std::vector<RegionalRates> rates;
  for (int year : years_of(preloaded->trips, include_2018)) {
    shares.push_back(regional_distribution(preloaded->trips, region_map, year));
    rates.push_back(regional_cost_per_hour(preloaded->trips, region_map, year));
  }
  if (shares.empty()) throw DataError("regional: no years to report (2018 excluded by default)");
  ctx.emit("regional_shares.csv", regional_shares_csv(shares));
  ctx.emit("regional_cost.csv", regional_rates_csv(rates));
  ctx.counters["years"] = shares.size();
}

struct SimStage {
  std::vector<TripRecord> trips;  // centroid-complete subset the routes index into
  SimOutput output;
};

SimStage stage_simulate(StageContext& ctx) {
  SimStage st;
  LoadedTrips loaded = load_trips(ctx.cfg, false);
  uint64_t dropped = 0;
  st.trips = centroid_complete(std::move(loaded.trips), dropped);
  if (st.trips.empty()) throw DataError("simulate: no trips with both centroids");
  const SimParams params = sim_params_from_config(ctx.cfg);
  st.output = simulate(st.trips, params);

  const ValidationReport check = validate_routes(st.output, st.trips, params);
  if (!check.ok)
    throw std::logic_error("simulate: internal invariant failure: " +
                           (check.message.empty() ? std::string("route constraint violated")
                                                  : check.message));

  ctx.emit("routes.csv", routes_csv(st.output.routes, st.trips));
  ctx.emit("sim_stats.json", sim_stats_json(st.output.stats, params, st.trips.size()));
  ctx.counters["input_trips"] = st.trips.size();
  ctx.counters["centroid_incomplete_dropped"] = dropped;
  ctx.counters["drivers"] = st.output.stats.total_drivers;
  return st;
}

struct FeatureStage {
  std::vector<DriverRoute> active;
  FeatureMatrix fm;
};

FeatureStage build_features(StageContext& ctx, std::vector<DriverRoute> routes,
                            std::span<const TripRecord> trips, const RegionMap& region_map) {
  FeatureStage st;
  const int min_trips = get_or<int>(ctx.cfg.effective, "features.min_trips", 2);
  FeatureOptions options;
  options.include_dropoff_regions =
      get_or<bool>(ctx.cfg.effective, "features.include_dropoff_regions", false);
  st.active = filter_active(std::move(routes), min_trips);
  st.fm = feature_matrix(st.active, trips, region_map, options);
  ctx.counters["active_routes"] = st.active.size();
  ctx.counters["clustered_routes"] = st.fm.values.rows;
  ctx.counters["rejected_all_unknown"] = st.fm.rejected_all_unknown;
  return st;
}

void stage_features(StageContext& ctx) {
  LoadedTrips loaded = load_trips(ctx.cfg, false);
  uint64_t dropped = 0;
  std::vector<TripRecord> trips = centroid_complete(std::move(loaded.trips), dropped);
  const RegionMap region_map = load_region(ctx.cfg);
  const auto routes_path = ctx.cfg.resolve(require_string(ctx.cfg.effective, "stage_inputs.routes"));
  FeatureStage st = build_features(ctx, routes_from_csv(routes_path, trips), trips, region_map);
  if (st.fm.values.rows == 0) throw DataError("features: no clusterable routes");
  ctx.emit("features.csv", feature_matrix_csv(st.fm));
}

struct ClusterStage {
  ClusterModel model;
  KSelectionReport report;
  Standardization st;
  std::vector<uint32_t> route_ids;
  std::vector<std::string> names;
};

ClusterStage cluster_matrix(StageContext& ctx, const FeatureMatrix& fm) {
  ClusterStage st;
  auto [standardized, stats] = standardize(fm.values);
  st.st = std::move(stats);
  SelectKOptions options;
  options.kmeans.n_restarts = get_or<int>(ctx.cfg.effective, "cluster.n_restarts", 10);
  options.kmeans.max_iter = get_or<int>(ctx.cfg.effective, "cluster.max_iter", 300);
  options.kmeans.tol = get_or<double>(ctx.cfg.effective, "cluster.tol", 1e-4);
  options.silhouette_subsample =
      get_or<size_t>(ctx.cfg.effective, "cluster.silhouette_subsample", 10000);
  const int k_min = get_or<int>(ctx.cfg.effective, "cluster.k_min", 4);
  const int k_max = get_or<int>(ctx.cfg.effective, "cluster.k_max", 16);
  auto [model, report] = select_k(standardized, k_min, k_max, ctx.cfg.seed, options);
  st.model = std::move(model);
  st.report = std::move(report);
  st.route_ids = fm.route_ids;
  st.names = fm.names;
  ctx.counters["best_k"] = st.report.best_k;
  return st;
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open features file: " + path.string());
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row) || row.size() < 2 || row[0] != "route_id")
    throw DataError("bad features header in " + path.string());
  FeatureMatrix fm;
  fm.names.assign(row.begin() + 1, row.end());
  std::vector<double> values;
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != fm.names.size() + 1) throw DataError("bad features row in " + path.string());
    auto id = parse_int(row[0]);
    if (!id) throw DataError("bad route_id in " + path.string());
    fm.route_ids.push_back(static_cast<uint32_t>(*id));
    for (size_t c = 1; c < row.size(); ++c) {
      auto v = parse_double(row[c]);
      if (!v) throw DataError("bad feature value in " + path.string());
      values.push_back(*v);
    }
  }
  fm.values = Matrix(fm.route_ids.size(), fm.names.size());
  fm.values.data = std::move(values);
  return fm;
}

void stage_cluster(StageContext& ctx) {
  const auto features_path =
      ctx.cfg.resolve(require_string(ctx.cfg.effective, "stage_inputs.features"));
  const FeatureMatrix fm = read_feature_matrix(features_path);
  ClusterStage st = cluster_matrix(ctx, fm);
  ctx.emit("model.json", model_json(st.model, st.st, st.report, st.names));
  ctx.emit("assignments.csv", assignments_csv(st.route_ids, st.model.assignments));
}

std::unordered_map<uint32_t, int> read_assignments(const std::filesystem::path& path, int& k) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open assignments file: " + path.string());
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row) || row.size() != 2) throw DataError("bad assignments header");
  std::unordered_map<uint32_t, int> map;
  k = 0;
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    auto id = parse_int(row[0]);
    auto c = parse_int(row[1]);
    if (!id || !c || *c < 0) throw DataError("bad assignments row in " + path.string());
    map[static_cast<uint32_t>(*id)] = static_cast<int>(*c);
    k = std::max(k, static_cast<int>(*c) + 1);
  }
  return map;
}

void emit_report(StageContext& ctx, std::span<const DriverRoute> routes,
                 std::span<const TripRecord> trips, std::span<const int> assignments, int k,
                 const RegionMap& region_map) {
  std::vector<RouteMetrics> metrics;
  metrics.reserve(routes.size());
  for (const DriverRoute& r : routes) metrics.push_back(route_metrics(r, trips));

  const auto rows = cluster_report(routes, metrics, assignments, k);
  ctx.emit("cluster_report.csv", cluster_report_csv(rows));
  ctx.emit("report_markers.json", report_markers_json(rows));
  ctx.emit("temporal_proportions.csv",
           temporal_proportions_csv(temporal_proportions(routes, trips, assignments, k)));
  ctx.emit("regional_proportions.csv",
           regional_proportions_csv(regional_proportions(routes, trips, assignments, k, region_map),
                                    region_map));
  ctx.counters["report_clusters"] = rows.size();
}

void stage_report(StageContext& ctx) {
  LoadedTrips loaded = load_trips(ctx.cfg, false);
  uint64_t dropped = 0;
  std::vector<TripRecord> trips = centroid_complete(std::move(loaded.trips), dropped);
  const RegionMap region_map = load_region(ctx.cfg);
  auto routes = routes_from_csv(
      ctx.cfg.resolve(require_string(ctx.cfg.effective, "stage_inputs.routes")), trips);
  int k = 0;
  auto assignment_map = read_assignments(
      ctx.cfg.resolve(require_string(ctx.cfg.effective, "stage_inputs.assignments")), k);

  std::vector<DriverRoute> clustered;
  std::vector<int> assignments;
  for (auto& r : routes) {
    auto it = assignment_map.find(r.driver_id);
    if (it == assignment_map.end()) continue;
    assignments.push_back(it->second);
    clustered.push_back(std::move(r));
  }
  if (clustered.empty()) throw DataError("report: assignments match no routes");
  emit_report(ctx, clustered, trips, assignments, k, region_map);
}

void stage_synth(StageContext& ctx) {
  const SynthParams params = synth_params_from_config(ctx.cfg);
  const SynthOutput out = generate(params);
  std::ostringstream trips_csv_buf;
  write_trips_csv(trips_csv_buf, out.trips, schema_from_config(ctx.cfg));
  ctx.emit("synth_trips.csv", trips_csv_buf.str());
  ctx.emit("truth.csv", truth_csv(out.truth, out.trips));
  ctx.counters["drivers"] = out.truth.size();
  ctx.counters["trips"] = out.trips.size();
}

void stage_evaluate(StageContext& ctx) {
  const auto truth = read_routes_csv(ctx.cfg.resolve(require_string(ctx.cfg.effective, "evaluate.truth")));
  const auto predicted =
      read_routes_csv(ctx.cfg.resolve(require_string(ctx.cfg.effective, "evaluate.predicted")));
  const ReconstructionScore s = score_by_id(truth, predicted);
  ctx.emit("score.json", score_json(s));
  ctx.counters["exact_partition"] = s.exact_partition;
}

void stage_pipeline(StageContext& ctx) {
  LoadedTrips loaded = load_trips(ctx.cfg, false);
  const RegionMap region_map = load_region(ctx.cfg);

  stage_monthly(ctx, &loaded);
  stage_regional(ctx, &loaded);

  uint64_t dropped = 0;
  std::vector<TripRecord> trips = centroid_complete(std::move(loaded.trips), dropped);
  if (trips.empty()) throw DataError("pipeline: no trips with both centroids");
  const SimParams params = sim_params_from_config(ctx.cfg);
  const SimOutput sim = simulate(trips, params);
  const ValidationReport check = validate_routes(sim, trips, params);
  if (!check.ok) throw std::logic_error("pipeline: simulator invariant failure");
  ctx.emit("routes.csv", routes_csv(sim.routes, trips));
  ctx.emit("sim_stats.json", sim_stats_json(sim.stats, params, trips.size()));
  ctx.counters["input_trips"] = trips.size();
  ctx.counters["centroid_incomplete_dropped"] = dropped;
  ctx.counters["drivers"] = sim.stats.total_drivers;

  FeatureStage features = build_features(ctx, sim.routes, trips, region_map);
  if (features.fm.values.rows == 0) throw DataError("pipeline: no clusterable routes");
  ctx.emit("features.csv", feature_matrix_csv(features.fm));

  ClusterStage clusters = cluster_matrix(ctx, features.fm);
  ctx.emit("model.json", model_json(clusters.model, clusters.st, clusters.report, clusters.names));
  ctx.emit("assignments.csv", assignments_csv(clusters.route_ids, clusters.model.assignments));

  // Align clustered routes with the feature rows (all-Unknown rejects are gone).
  std::unordered_map<uint32_t, const DriverRoute*> by_id;
  for (const auto& r : features.active) by_id.emplace(r.driver_id, &r);
  std::vector<DriverRoute> clustered;
  clustered.reserve(clusters.route_ids.size());
  for (uint32_t id : clusters.route_ids) clustered.push_back(*by_id.at(id));
  emit_report(ctx, clustered, trips, clusters.model.assignments, clusters.model.k, region_map);
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& config_path,
                          const std::vector<std::string>& overrides) {
  RunConfig cfg;
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config: " + config_path.string());
  try {
    cfg.effective = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  if (!cfg.effective.is_object()) throw ConfigError("config must be a JSON object");
  cfg.base_dir = std::filesystem::absolute(config_path).parent_path();

  for (const std::string& kv : overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override must look like key.path=value: \"" + kv + "\"");
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    ordered_json value;
    try {
      value = ordered_json::parse(raw);
    } catch (const nlohmann::json::exception&) {
      value = raw;  // plain string
    }
    set_key(cfg.effective, key, std::move(value));
  }

  const ordered_json* seed = find_key(cfg.effective, "seed");
  if (seed == nullptr || !seed->is_number())
    throw ConfigError("config field \"seed\" is required (no wall-clock default)");
  cfg.seed = seed->get<uint64_t>();

  // Hash over the sorted-key dump, minus output_dir so relocating a run does
  // not change its identity.
  nlohmann::json canonical = cfg.effective;
  canonical.erase("output_dir");
  cfg.config_hash = fnv1a64(canonical.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(cfg.config_hash));
  cfg.run_id = std::string(buf).substr(0, 12);
  return cfg;
}

std::filesystem::path RunConfig::resolve(const std::string& rel) const {
  std::filesystem::path p(rel);
  return p.is_absolute() ? p : base_dir / p;
}

std::filesystem::path RunConfig::output_dir() const {
  return resolve(get_or<std::string>(effective, "output_dir", "out"));
}

RunResult run_subcommand(const std::string& name, const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  StageContext ctx{config, {}, ordered_json::object()};

  if (name == "ingest") stage_ingest(ctx);
  else if (name == "monthly") stage_monthly(ctx);
  else if (name == "regional") stage_regional(ctx);
  else if (name == "simulate") stage_simulate(ctx);
  else if (name == "features") stage_features(ctx);
  else if (name == "cluster") stage_cluster(ctx);
  else if (name == "report") stage_report(ctx);
  else if (name == "synth") stage_synth(ctx);
  else if (name == "evaluate") stage_evaluate(ctx);
  else if (name == "pipeline") stage_pipeline(ctx);
  else throw ConfigError("unknown subcommand: " + name);

  RunResult result;
  result.run_dir = config.run_dir();
  std::filesystem::create_directories(result.run_dir);
  for (const auto& [file, content] : ctx.artifacts) {
    write_file_atomic(result.run_dir / file, content);
    result.artifacts.push_back(file);
  }

  ordered_json manifest;
  manifest["subcommand"] = name;
  manifest["config_hash"] = config.run_id;
  manifest["seed"] = config.seed;
  manifest["counters"] = ctx.counters;
  manifest["artifacts"] = result.artifacts;
  manifest["wall_time_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
  const std::string manifest_name = name == "pipeline" ? "manifest.json" : "manifest_" + name + ".json";
  write_file_atomic(result.run_dir / manifest_name, manifest.dump(2) + "\n");
  result.artifacts.push_back(manifest_name);
  return result;
}

}  // namespace tripweave
