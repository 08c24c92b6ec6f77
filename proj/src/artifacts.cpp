#include "tripweave/artifacts.hpp"

#include <fstream>
#include <map>
#include <json.hpp>
#include <sstream>

#include "tripweave/csv.hpp"
#include "tripweave/errors.hpp"
#include "tripweave/money.hpp"

namespace tripweave {

using ordered_json = nlohmann::ordered_json;

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string routes_csv(std::span<const DriverRoute> routes, std::span<const TripRecord> trips) {
  std::ostringstream out;
  out << "driver_id,seq,trip_id\n";
  std::vector<std::string> row(3);
  for (const DriverRoute& r : routes) {
    for (size_t i = 0; i < r.trips.size(); ++i) {
      row[0] = std::to_string(r.driver_id);
      row[1] = std::to_string(i);
      row[2] = trips[r.trips[i]].trip_id;
      write_csv_row(out, row);
    }
  }
  return out.str();
}

std::vector<std::vector<std::string>> read_routes_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open routes file: " + path.string());
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row) || row.size() != 3 || row[2] != "trip_id")
    throw DataError("bad routes file header in " + path.string());

  std::map<int64_t, std::vector<std::pair<int64_t, std::string>>> by_driver;
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 3) throw DataError("bad routes row in " + path.string());
    auto driver = parse_int(row[0]);
    auto seq = parse_int(row[1]);
    if (!driver || !seq) throw DataError("bad routes row in " + path.string());
    by_driver[*driver].emplace_back(*seq, row[2]);
  }
  std::vector<std::vector<std::string>> routes;
  routes.reserve(by_driver.size());
  for (auto& [_, entries] : by_driver) {
    std::sort(entries.begin(), entries.end());
    std::vector<std::string> ids;
    ids.reserve(entries.size());
    for (auto& [_seq, id] : entries) ids.push_back(std::move(id));
    routes.push_back(std::move(ids));
  }
  return routes;
}

std::string sim_stats_json(const SimStats& stats, const SimParams& params, uint64_t input_trips) {
  ordered_json j;
  j["input_trips"] = input_trips;
  j["total_drivers"] = stats.total_drivers;
  j["singleton_routes"] = stats.singleton_routes;
  j["partitions"] = stats.partitions;
  ordered_json hist = ordered_json::object();
  for (const auto& [len, n] : stats.route_length_hist) hist[std::to_string(len)] = n;
  j["route_length_hist"] = hist;
  j["pick_stats"] = {{"session_filtered_candidates", stats.session_filtered_candidates},
                     {"max_trips_stops", stats.max_trips_stops},
                     {"empty_candidate_stops", stats.empty_candidate_stops}};
  j["params"] = {{"alpha_hours", params.alpha_hours},
                 {"max_dist_mi", params.max_dist_mi},
                 {"max_trips", params.max_trips},
                 {"max_session_hours", params.max_session_hours},
                 {"top_k", params.top_k},
                 {"partition_by_day", params.partition_by_day},
                 {"seed", params.seed}};
  return j.dump(2) + "\n";
}

std::string ingest_stats_json(const IngestStats& stats) {
  ordered_json j;
  j["rows_read"] = stats.rows_read;
  j["rows_accepted"] = stats.rows_accepted;
  ordered_json rejects = ordered_json::object();
  for (const auto& [reason, n] : stats.rejects_by_reason) rejects[reason] = n;
  j["rejects_by_reason"] = rejects;
  j["rows_rejected"] = stats.rejected_total();
  return j.dump(2) + "\n";
}

std::string feature_matrix_csv(const FeatureMatrix& fm) {
  std::ostringstream out;
  std::vector<std::string> row;
  row.push_back("route_id");
  for (const auto& n : fm.names) row.push_back(n);
  write_csv_row(out, row);
  for (size_t r = 0; r < fm.values.rows; ++r) {
    row.clear();
    row.push_back(std::to_string(fm.route_ids[r]));
    for (size_t c = 0; c < fm.values.cols; ++c) row.push_back(format_double(fm.values.at(r, c)));
    write_csv_row(out, row);
  }
  return out.str();
}

std::string assignments_csv(std::span<const uint32_t> route_ids, std::span<const int> assignments) {
  std::ostringstream out;
  out << "route_id,cluster\n";
  for (size_t i = 0; i < route_ids.size(); ++i)
    out << route_ids[i] << ',' << assignments[i] << '\n';
  return out.str();
}

std::string model_json(const ClusterModel& model, const Standardization& st,
                       const KSelectionReport& report, std::span<const std::string> feature_names) {
  ordered_json j;
  j["k"] = model.k;
  j["inertia"] = model.inertia;
  j["seed"] = model.seed;
  j["n_restarts"] = model.n_restarts;
  j["feature_names"] = feature_names;

  ordered_json centroids = ordered_json::array();
  ordered_json destandardized = ordered_json::array();
  for (int c = 0; c < model.k; ++c) {
    const auto row = std::span<const double>(model.centroids.row(static_cast<size_t>(c)),
                                             model.centroids.cols);
    centroids.push_back(std::vector<double>(row.begin(), row.end()));
    destandardized.push_back(st.invert(row));
  }
  j["centroids_standardized"] = centroids;
  j["centroids"] = destandardized;

  j["standardization"] = {{"mean", st.mean},
                          {"sd", st.sd},
                          {"zero_variance", std::vector<int>(st.zero_variance.begin(),
                                                             st.zero_variance.end())}};
  ordered_json scores = ordered_json::object();
  for (const auto& [k, s] : report.scores) scores[std::to_string(k)] = s;
  j["k_selection"] = {{"scores", scores},
                      {"best_k", report.best_k},
                      {"subsample_size", report.subsample_size},
                      {"subsample_seed", report.subsample_seed}};
  return j.dump(2) + "\n";
}

std::string cluster_report_csv(std::span<const ClusterReportRow> rows) {
  std::ostringstream out;
  out << "cluster,members,mean_trips,e_per_trip,e_per_drive_hr,est_e_per_hr,total_fares,total_income,"
         "e_per_trip_rot,e_per_drive_hr_rot,est_e_per_hr_rot,rate_excluded_routes\n";
  for (const auto& r : rows) {
    out << r.cluster << ',' << r.members << ',' << format_double(r.mean_trips) << ','
        << format_double(r.e_per_trip) << ',' << format_double(r.e_per_drive_hr) << ','
        << format_double(r.est_e_per_hr) << ',' << format_double(r.total_fares) << ','
        << format_double(r.total_income) << ',' << format_double(r.e_per_trip_rot) << ','
        << format_double(r.e_per_drive_hr_rot) << ',' << format_double(r.est_e_per_hr_rot) << ','
        << r.rate_excluded_routes << '\n';
  }
  return out.str();
}

std::string report_markers_json(std::span<const ClusterReportRow> rows) {
  ordered_json j = ordered_json::object();
  for (const auto& [column, hilo] : report_markers(rows)) {
    j[column] = {{"highest", hilo.first}, {"lowest", hilo.second}};
  }
  return j.dump(2) + "\n";
}

std::string monthly_csv(const MonthlySeries& series) {
  std::ostringstream out;
  out << "year,month,n_trips,total_trip_total_usd,total_driving_hours,cost_per_driving_hour,"
         "cost_mean_of_ratios\n";
  for (const auto& r : series.rows) {
    out << r.year << ',' << r.month << ',' << r.n_trips << ',' << format_double(r.total_usd) << ','
        << format_double(r.total_driving_hours) << ',' << opt_str(r.cost_per_driving_hour) << ','
        << opt_str(r.cost_mean_of_ratios) << '\n';
  }
  return out.str();
}

std::string temporal_proportions_csv(std::span<const ClusterProportions> rows) {
  std::ostringstream out;
  out << "cluster,key,value\n";
  for (const auto& p : rows) {
    for (size_t b = 0; b < p.shares.size(); ++b) {
      out << p.cluster << ",start_" << b * 3 << "_" << b * 3 + 3 << ','
          << format_double(p.shares[b]) << '\n';
    }
  }
  return out.str();
}

std::string regional_proportions_csv(std::span<const RegionalClusterProportions> rows,
                                     const RegionMap& region_map) {
  std::ostringstream out;
  out << "cluster,key,value\n";
  std::vector<std::string> row(3);
  for (const auto& p : rows) {
    for (int e = 0; e < 2; ++e) {
      const auto& shares = p.by_endpoint[e].shares;
      for (size_t r = 0; r < shares.size(); ++r) {
        row[0] = std::to_string(p.cluster);
        row[1] = std::string(kEndpointNames[e]) + "_" + region_map.region_order()[r];
        row[2] = format_double(shares[r]);
        write_csv_row(out, row);
      }
    }
  }
  return out.str();
}

std::string regional_shares_csv(std::span<const RegionalShares> tables) {
  std::ostringstream out;
  out << "year,endpoint,region,n_trips,trip_share_pct\n";
  std::vector<std::string> row(5);
  for (const auto& t : tables) {
    for (int e = 0; e < 2; ++e) {
      for (const auto& r : t.by_endpoint[e]) {
        row[0] = std::to_string(t.year);
        row[1] = kEndpointNames[e];
        row[2] = r.region;
        row[3] = std::to_string(r.n_trips);
        row[4] = format_double(r.share_pct);
        write_csv_row(out, row);
      }
      row[0] = std::to_string(t.year);
      row[1] = kEndpointNames[e];
      row[2] = std::string(kUnknownRegion);
      row[3] = std::to_string(t.unknown_trips[e]);
      row[4] = "";
      write_csv_row(out, row);
    }
  }
  return out.str();
}

std::string regional_rates_csv(std::span<const RegionalRates> tables) {
  std::ostringstream out;
  out << "year,endpoint,region,n_trips,total_usd,driving_hours,cost_per_driving_hour,"
         "cost_mean_of_ratios\n";
  std::vector<std::string> row(8);
  for (const auto& t : tables) {
    for (int e = 0; e < 2; ++e) {
      for (const auto& r : t.by_endpoint[e]) {
        row[0] = std::to_string(t.year);
        row[1] = kEndpointNames[e];
        row[2] = r.region;
        row[3] = std::to_string(r.n_trips);
        row[4] = format_double(r.total_usd);
        row[5] = format_double(r.driving_hours);
        row[6] = opt_str(r.cost_per_driving_hour);
        row[7] = opt_str(r.cost_mean_of_ratios);
        write_csv_row(out, row);
      }
    }
  }
  return out.str();
}

std::string score_json(const ReconstructionScore& s) {
  ordered_json j;
  j["pair_precision"] = s.pair_precision ? ordered_json(*s.pair_precision) : ordered_json(nullptr);
  j["pair_recall"] = s.pair_recall ? ordered_json(*s.pair_recall) : ordered_json(nullptr);
  j["pair_f1"] = s.pair_f1;
  j["exact_partition"] = s.exact_partition;
  j["route_count_delta"] = s.route_count_delta;
  j["truth_links"] = s.truth_links;
  j["predicted_links"] = s.predicted_links;
  j["common_links"] = s.common_links;
  return j.dump(2) + "\n";
}

std::string truth_csv(std::span<const std::vector<TripIdx>> truth, std::span<const TripRecord> trips) {
  std::ostringstream out;
  out << "driver_id,seq,trip_id\n";
  std::vector<std::string> row(3);
  for (size_t d = 0; d < truth.size(); ++d) {
    for (size_t i = 0; i < truth[d].size(); ++i) {
      row[0] = std::to_string(d);
      row[1] = std::to_string(i);
      row[2] = trips[truth[d][i]].trip_id;
      write_csv_row(out, row);
    }
  }
  return out.str();
}

}  // namespace tripweave
