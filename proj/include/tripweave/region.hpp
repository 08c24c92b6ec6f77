#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tripweave {

inline constexpr int kNumCommunityAreas = 77;
inline constexpr std::string_view kUnknownRegion = "Unknown";

// Total mapping from Chicago community area ids (1..77) to named regions.
class RegionMap {
 public:
  RegionMap(std::array<int, kNumCommunityAreas + 1> area_to_region, std::vector<std::string> region_order)
      : area_to_region_(area_to_region), region_order_(std::move(region_order)) {}

  const std::vector<std::string>& region_order() const { return region_order_; }
  size_t region_count() const { return region_order_.size(); }

  // area must be in 1..77.
  const std::string& name_of(int area) const { return region_order_[static_cast<size_t>(area_to_region_[area])]; }
  int region_index(int area) const { return area_to_region_[area]; }

  // Index into region_order, or -1 for Unknown (absent / out-of-range area).
  int region_index_or_unknown(std::optional<int> area) const {
    if (!area || *area < 1 || *area > kNumCommunityAreas) return -1;
    return area_to_region_[*area];
  }

 private:
  std::array<int, kNumCommunityAreas + 1> area_to_region_;  // [0] unused
  std::vector<std::string> region_order_;
};

// Accepts CSV rows `area_id,region` (header optional) or a JSON object {"1": "West", ...}.
// Fatal if any id in 1..77 is unmapped, duplicated, or out of range.
RegionMap load_region_map(const std::filesystem::path& config_file);

std::string_view map_area_to_region(std::optional<int> area, const RegionMap& map);

}  // namespace tripweave
