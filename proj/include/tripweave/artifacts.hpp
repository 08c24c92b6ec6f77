#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tripweave/analytics.hpp"
#include "tripweave/clustering.hpp"
#include "tripweave/features.hpp"
#include "tripweave/ingest.hpp"
#include "tripweave/simulator.hpp"
#include "tripweave/synth.hpp"

namespace tripweave {

// Atomic file placement: temp in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// routes file: driver_id,seq,trip_id
std::string routes_csv(std::span<const DriverRoute> routes, std::span<const TripRecord> trips);
// -> ordered trip-id sequences, grouped by driver_id, ordered by seq
std::vector<std::vector<std::string>> read_routes_csv(const std::filesystem::path& path);

std::string sim_stats_json(const SimStats& stats, const SimParams& params, uint64_t input_trips);
std::string ingest_stats_json(const IngestStats& stats);
std::string feature_matrix_csv(const FeatureMatrix& fm);
std::string assignments_csv(std::span<const uint32_t> route_ids, std::span<const int> assignments);
std::string model_json(const ClusterModel& model, const Standardization& st,
                       const KSelectionReport& report, std::span<const std::string> feature_names);
std::string cluster_report_csv(std::span<const ClusterReportRow> rows);
std::string report_markers_json(std::span<const ClusterReportRow> rows);
std::string monthly_csv(const MonthlySeries& series);
// long format: cluster,key,value
std::string temporal_proportions_csv(std::span<const ClusterProportions> rows);
std::string regional_proportions_csv(std::span<const RegionalClusterProportions> rows,
                                     const RegionMap& region_map);
// long format: year,endpoint,region,...
std::string regional_shares_csv(std::span<const RegionalShares> tables);
std::string regional_rates_csv(std::span<const RegionalRates> tables);
std::string score_json(const ReconstructionScore& s);
std::string truth_csv(std::span<const std::vector<TripIdx>> truth, std::span<const TripRecord> trips);

}  // namespace tripweave
