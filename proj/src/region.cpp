#include "tripweave/region.hpp"

#include <fstream>
#include <map>
#include <json.hpp>

#include "tripweave/csv.hpp"
#include "tripweave/errors.hpp"

namespace tripweave {

namespace {

RegionMap build(const std::vector<std::pair<int, std::string>>& entries, const std::string& source) {
  std::array<int, kNumCommunityAreas + 1> area_to_region;
  area_to_region.fill(-1);
  std::vector<std::string> order;
  std::map<std::string, int> name_index;

  for (const auto& [area, region] : entries) {
    if (area < 1 || area > kNumCommunityAreas)
      throw ConfigError(source + ": area id " + std::to_string(area) + " outside 1..77");
    if (area_to_region[area] != -1)
      throw ConfigError(source + ": duplicate mapping for area " + std::to_string(area));
    if (region.empty()) throw ConfigError(source + ": empty region name for area " + std::to_string(area));
    auto it = name_index.find(region);
    int idx;
    if (it == name_index.end()) {
      idx = static_cast<int>(order.size());
      order.push_back(region);
      name_index.emplace(region, idx);
    } else {
      idx = it->second;
    }
    area_to_region[area] = idx;
  }

  std::string missing;
  for (int a = 1; a <= kNumCommunityAreas; ++a) {
    if (area_to_region[a] == -1) {
      if (!missing.empty()) missing += ", ";
      missing += std::to_string(a);
    }
  }
  if (!missing.empty()) throw ConfigError(source + ": unmapped community areas: " + missing);

  return RegionMap(area_to_region, std::move(order));
}

}  // namespace

RegionMap load_region_map(const std::filesystem::path& config_file) {
  std::ifstream in(config_file);
  if (!in) throw ConfigError("cannot open region map: " + config_file.string());
  const std::string source = config_file.filename().string();

  std::vector<std::pair<int, std::string>> entries;
  if (config_file.extension() == ".json") {
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(source + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError(source + ": expected a JSON object of area id -> region");
    for (auto& [key, value] : j.items()) {
      auto id = parse_int(key);
      if (!id || !value.is_string())
        throw ConfigError(source + ": bad entry \"" + key + "\"");
      entries.emplace_back(static_cast<int>(*id), value.get<std::string>());
    }
  } else {
    CsvReader reader(in);
    std::vector<std::string> row;
    bool first = true;
    while (reader.next_row(row)) {
      if (row.size() == 1 && row[0].empty()) continue;
      if (row.size() != 2)
        throw ConfigError(source + ": expected 2 columns, got " + std::to_string(row.size()));
      auto id = parse_int(row[0]);
      if (!id) {
        if (first) {
          first = false;  // header row
          continue;
        }
        throw ConfigError(source + ": bad area id \"" + row[0] + "\"");
      }
      first = false;
      entries.emplace_back(static_cast<int>(*id), row[1]);
    }
  }
  return build(entries, source);
}

std::string_view map_area_to_region(std::optional<int> area, const RegionMap& map) {
  const int idx = map.region_index_or_unknown(area);
  if (idx < 0) return kUnknownRegion;
  return map.region_order()[static_cast<size_t>(idx)];
}

}  // namespace tripweave
