#include "tripweave/candidate_index.hpp"

#include <algorithm>
#include <numbers>
#include <set>
#include <stdexcept>
#include <utility>

namespace tripweave {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;
constexpr double kRadPerDeg = std::numbers::pi / 180.0;

uint64_t pack_cell(int32_t x, int32_t y) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(y)) << 32) | static_cast<uint32_t>(x);
}

}  // namespace

CandidateIndex::CandidateIndex(std::span<const TripRecord> trips, double bucket_minutes, double cell_miles)
    : CandidateIndex(trips, std::span<const TripIdx>{}, bucket_minutes, cell_miles) {
}

CandidateIndex::CandidateIndex(std::span<const TripRecord> trips, std::span<const TripIdx> subset,
                               double bucket_minutes, double cell_miles) {
  bucket_seconds_ = std::max<int64_t>(1, static_cast<int64_t>(std::llround(bucket_minutes * 60.0)));
  cell_lat_deg_ = cell_miles / kMilesPerDegreeLat;

  std::vector<TripIdx> all;
  if (subset.empty() && !trips.empty()) {
    all.resize(trips.size());
    for (size_t i = 0; i < trips.size(); ++i) all[i] = static_cast<TripIdx>(i);
    subset = all;
  }

  // Longitude cell width matches cell_miles at the data's mean latitude; this
  // only affects how many cells a query touches, never correctness.
  double lat_sum = 0;
  size_t lat_n = 0;
  for (TripIdx idx : subset) {
    if (trips[idx].pickup_centroid) {
      lat_sum += trips[idx].pickup_centroid->lat;
      ++lat_n;
    }
  }
  const double ref_lat = lat_n ? lat_sum / static_cast<double>(lat_n) : 41.88;
  const double cos_ref = std::max(0.05, std::cos(ref_lat * kRadPerDeg));
  cell_lon_deg_ = cell_miles / (kMilesPerDegreeLat * cos_ref);

  slot_.assign(trips.size(), -1);
  entries_.reserve(subset.size());
  ids_.reserve(subset.size());
  live_.reserve(subset.size());
  groups_.reserve(subset.size() / 4 + 16);

  for (TripIdx idx : subset) {
    const TripRecord& t = trips[idx];
    if (!t.pickup_centroid) {
      ++excluded_;
      continue;
    }
    Entry e;
    e.start_ts = t.start_ts;
    e.pickup = *t.pickup_centroid;
    e.bucket = t.start_ts >= 0 ? t.start_ts / bucket_seconds_
                               : (t.start_ts - bucket_seconds_ + 1) / bucket_seconds_;
    e.cell = cell_key_of(e.pickup);
    e.live = true;

    auto& group = groups_[GroupKey{e.cell, e.bucket}];
    e.pos_in_group = static_cast<uint32_t>(group.size());
    group.push_back(idx);

    e.pos_in_live = static_cast<uint32_t>(live_.size());
    live_.push_back(idx);

    slot_[idx] = static_cast<int32_t>(entries_.size());
    entries_.push_back(e);
    ids_.push_back(idx);
  }
}

uint64_t CandidateIndex::cell_key_of(const GeoPoint& p) const {
  const auto x = static_cast<int32_t>(std::floor(p.lon / cell_lon_deg_));
  const auto y = static_cast<int32_t>(std::floor(p.lat / cell_lat_deg_));
  return pack_cell(x, y);
}

const CandidateIndex::Entry* CandidateIndex::entry_of(TripIdx idx) const {
  if (idx >= slot_.size() || slot_[idx] < 0) return nullptr;
  return &entries_[static_cast<size_t>(slot_[idx])];
}

CandidateIndex::Entry* CandidateIndex::entry_of(TripIdx idx) {
  return const_cast<Entry*>(std::as_const(*this).entry_of(idx));
}

void CandidateIndex::query(const GeoPoint& dropoff, int64_t end_ts, double alpha_hours,
                           double max_dist_mi, std::vector<Candidate>& out) const {
  out.clear();
  if (groups_.empty()) return;
  const int64_t latest_start = end_ts + alpha_window_seconds(alpha_hours);

  // Bounding box guaranteed to contain the haversine disc of radius max_dist:
  // |dlat| <= d/R exactly; |dlon| maximized at constant latitude, where
  // sin(dlon/2) = sin(d/2R)/cos(lat).
  const double dist_rad = std::min(std::numbers::pi, max_dist_mi / kEarthRadiusMiles);
  const double dlat_deg = dist_rad * kDegPerRad + 1e-9;
  const double band_lat =
      std::min(89.9, std::max(std::abs(dropoff.lat - dlat_deg), std::abs(dropoff.lat + dlat_deg)));
  const double cos_band = std::cos(band_lat * kRadPerDeg);
  double dlon_deg = 180.0;
  if (cos_band > 1e-9) {
    const double s = std::min(1.0, std::sin(dist_rad / 2.0) / cos_band);
    dlon_deg = std::min(180.0, 2.0 * std::asin(s) * kDegPerRad + 1e-9);
  }

  const auto y0 = static_cast<int64_t>(std::floor((dropoff.lat - dlat_deg) / cell_lat_deg_));
  const auto y1 = static_cast<int64_t>(std::floor((dropoff.lat + dlat_deg) / cell_lat_deg_));
  const auto x0 = static_cast<int64_t>(std::floor((dropoff.lon - dlon_deg) / cell_lon_deg_));
  const auto x1 = static_cast<int64_t>(std::floor((dropoff.lon + dlon_deg) / cell_lon_deg_));

  const int64_t b0 = end_ts >= 0 ? end_ts / bucket_seconds_
                                 : (end_ts - bucket_seconds_ + 1) / bucket_seconds_;
  const int64_t b1 = latest_start >= 0 ? latest_start / bucket_seconds_
                                       : (latest_start - bucket_seconds_ + 1) / bucket_seconds_;

  // Equirectangular pre-reject: an overestimate-capped bound that can only
  // discard points strictly outside the radius; the exact haversine decides
  // everything near and inside it. The slack covers the cos(lat) variation
  // across the band plus curvature at this scale.
  const double cos_q = std::cos(dropoff.lat * kRadPerDeg);
  const double margin =
      1.0 + 0.02 + 2.0 * dist_rad * std::abs(std::tan(std::min(1.55, band_lat * kRadPerDeg)));
  const double reject_deg = (max_dist_mi / kMilesPerDegreeLat) * margin;
  const double reject_deg2 = reject_deg * reject_deg;

  for (int64_t y = y0; y <= y1; ++y) {
    for (int64_t x = x0; x <= x1; ++x) {
      const uint64_t cell = pack_cell(static_cast<int32_t>(x), static_cast<int32_t>(y));
      for (int64_t b = b0; b <= b1; ++b) {
        auto it = groups_.find(GroupKey{cell, b});
        if (it == groups_.end()) continue;
        for (const TripIdx idx : it->second) {
          const Entry& e = entries_[static_cast<size_t>(slot_[idx])];
          if (e.start_ts < end_ts || e.start_ts > latest_start) continue;
          const double dy = e.pickup.lat - dropoff.lat;
          const double dx = (e.pickup.lon - dropoff.lon) * cos_q;
          if (dy * dy + dx * dx > reject_deg2) continue;
          const double d = haversine_miles(dropoff, e.pickup);
          if (d <= max_dist_mi) out.push_back({idx, e.start_ts, d});
        }
      }
    }
  }

  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.start_ts != b.start_ts) return a.start_ts < b.start_ts;
    if (a.distance_mi != b.distance_mi) return a.distance_mi < b.distance_mi;
    return a.idx < b.idx;
  });
}

std::vector<TripIdx> CandidateIndex::query_candidates(const GeoPoint& dropoff, int64_t end_ts,
                                                      double alpha_hours, double max_dist_mi) const {
  std::vector<Candidate> buf;
  query(dropoff, end_ts, alpha_hours, max_dist_mi, buf);
  std::vector<TripIdx> ids;
  ids.reserve(buf.size());
  for (const Candidate& c : buf) ids.push_back(c.idx);
  return ids;
}

void CandidateIndex::remove(TripIdx idx) {
  Entry* e = entry_of(idx);
  if (e == nullptr || !e->live) throw std::logic_error("CandidateIndex::remove: trip not live");

  auto group_it = groups_.find(GroupKey{e->cell, e->bucket});
  auto& group = group_it->second;
  const TripIdx moved = group.back();
  group[e->pos_in_group] = moved;
  entries_[static_cast<size_t>(slot_[moved])].pos_in_group = e->pos_in_group;
  group.pop_back();
  if (group.empty()) groups_.erase(group_it);

  const TripIdx moved_live = live_.back();
  live_[e->pos_in_live] = moved_live;
  entries_[static_cast<size_t>(slot_[moved_live])].pos_in_live = e->pos_in_live;
  live_.pop_back();

  e->live = false;
}

bool CandidateIndex::is_live(TripIdx idx) const {
  const Entry* e = entry_of(idx);
  return e != nullptr && e->live;
}

int64_t CandidateIndex::bucket_of(TripIdx idx) const {
  const Entry* e = entry_of(idx);
  return e ? e->bucket : INT64_MIN;
}

uint64_t CandidateIndex::cell_of(TripIdx idx) const {
  const Entry* e = entry_of(idx);
  return e ? e->cell : 0;
}

size_t CandidateIndex::bucket_count() const {
  std::set<int64_t> buckets;
  for (const TripIdx idx : live_) buckets.insert(entries_[static_cast<size_t>(slot_[idx])].bucket);
  return buckets.size();
}

size_t CandidateIndex::cell_count() const {
  std::set<uint64_t> cells;
  for (const TripIdx idx : live_) cells.insert(entries_[static_cast<size_t>(slot_[idx])].cell);
  return cells.size();
}

bool CandidateIndex::check_invariants() const {
  size_t live_n = 0;
  for (size_t s = 0; s < entries_.size(); ++s) {
    const Entry& e = entries_[s];
    const TripIdx idx = ids_[s];
    const auto group_it = groups_.find(GroupKey{e.cell, e.bucket});
    const bool in_group = group_it != groups_.end() && e.pos_in_group < group_it->second.size() &&
                          group_it->second[e.pos_in_group] == idx;
    const bool in_live = e.pos_in_live < live_.size() && live_[e.pos_in_live] == idx;
    if (e.live) {
      if (!in_group || !in_live) return false;
      ++live_n;
    } else if (in_group) {
      return false;
    }
  }
  if (live_n != live_.size()) return false;

  size_t group_total = 0;
  for (const auto& [_, group] : groups_) {
    if (group.empty()) return false;  // tombstone leak
    group_total += group.size();
  }
  return group_total == live_n;
}

}  // namespace tripweave
