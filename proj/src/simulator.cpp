#include "tripweave/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

#include "tripweave/errors.hpp"

namespace tripweave {

void SimParams::validate() const {
  if (alpha_hours <= 0) throw ConfigError("alpha_hours must be > 0");
  if (max_dist_mi <= 0) throw ConfigError("max_dist_mi must be > 0");
  if (max_trips <= 0) throw ConfigError("max_trips must be > 0");
  if (max_session_hours <= 0) throw ConfigError("max_session_hours must be > 0");
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
  if (bucket_minutes <= 0) throw ConfigError("bucket_minutes must be > 0");
  if (cell_miles <= 0) throw ConfigError("cell_miles must be > 0");
}

TripIdx pick_start(std::span<const TripIdx> pool, Rng& rng) {
  if (pool.empty()) throw std::logic_error("pick_start: empty pool");
  return pool[rng.bounded(pool.size())];
}

TripIdx pick_next(std::span<const CandidateIndex::Candidate> ordered, int top_k, Rng& rng) {
  if (ordered.empty()) throw std::logic_error("pick_next: empty candidates");
  const size_t window = std::min<size_t>(static_cast<size_t>(top_k), ordered.size());
  return ordered[rng.bounded(window)].idx;
}

std::string_view constraint_name(Constraint c) {
  switch (c) {
    case Constraint::temporal: return "temporal";
    case Constraint::spatial: return "spatial";
    case Constraint::max_trips: return "max_trips";
    case Constraint::session_hours: return "session_hours";
    case Constraint::none: break;
  }
  return "none";
}

ExtensionCheck check_extension(const DriverRoute& route, std::span<const TripRecord> trips,
                               TripIdx candidate, const SimParams& params) {
  if (route.trips.empty()) throw std::logic_error("check_extension: empty route");
  const TripRecord& last = trips[route.trips.back()];
  const TripRecord& first = trips[route.trips.front()];
  const TripRecord& cand = trips[candidate];

  const int64_t gap = cand.start_ts - last.end_ts;
  if (gap < 0 || gap > alpha_window_seconds(params.alpha_hours))
    return {false, Constraint::temporal};

  if (!last.dropoff_centroid || !cand.pickup_centroid) return {false, Constraint::spatial};
  if (haversine_miles(*last.dropoff_centroid, *cand.pickup_centroid) > params.max_dist_mi)
    return {false, Constraint::spatial};

  if (route.trips.size() >= static_cast<size_t>(params.max_trips))
    return {false, Constraint::max_trips};

  if (cand.end_ts - first.start_ts > session_window_seconds(params.max_session_hours))
    return {false, Constraint::session_hours};

  return {true, Constraint::none};
}

namespace {

struct PartitionResult {
  std::vector<DriverRoute> routes;
  SimStats stats;
};

// Live trips with no live feasible predecessor. Chains start here so that a
// forced chain reassembles in full no matter which seed drives the picks.
class HeadSet {
 public:
  explicit HeadSet(size_t n) : pos_(n, -1) {}

  void add(TripIdx idx) {
    if (pos_[idx] >= 0) return;
    pos_[idx] = static_cast<int32_t>(heads_.size());
    heads_.push_back(idx);
  }

  void remove_if_present(TripIdx idx) {
    const int32_t p = pos_[idx];
    if (p < 0) return;
    const TripIdx moved = heads_.back();
    heads_[static_cast<size_t>(p)] = moved;
    pos_[moved] = p;
    heads_.pop_back();
    pos_[idx] = -1;
  }

  bool empty() const { return heads_.empty(); }
  std::span<const TripIdx> view() const { return heads_; }

 private:
  std::vector<TripIdx> heads_;
  std::vector<int32_t> pos_;
};

PartitionResult simulate_partition(std::span<const TripRecord> trips, std::span<const TripIdx> subset,
                                   const SimParams& params, uint64_t stream_key) {
  PartitionResult result;
  Rng rng = Rng::substream(params.seed, stream_key);
  CandidateIndex index(trips, subset, params.bucket_minutes, params.cell_miles);

  const int64_t session_s = session_window_seconds(params.max_session_hours);

  // Count live feasible predecessors per trip; a trip is a head at count zero.
  std::vector<uint32_t> pred_count(trips.size(), 0);
  std::vector<CandidateIndex::Candidate> buf;
  for (TripIdx u : subset) {
    const TripRecord& t = trips[u];
    index.query(*t.dropoff_centroid, t.end_ts, params.alpha_hours, params.max_dist_mi, buf);
    for (const auto& c : buf) {
      if (c.idx != u) ++pred_count[c.idx];
    }
  }
  HeadSet heads(trips.size());
  for (TripIdx u : subset) {
    if (pred_count[u] == 0) heads.add(u);
  }

  // Removes `idx` from the pool and returns its still-live successors; those
  // losing their last live predecessor become heads.
  auto consume = [&](TripIdx idx, std::vector<CandidateIndex::Candidate>& successors) {
    index.remove(idx);
    heads.remove_if_present(idx);
    const TripRecord& t = trips[idx];
    index.query(*t.dropoff_centroid, t.end_ts, params.alpha_hours, params.max_dist_mi, successors);
    for (const auto& c : successors) {
      if (--pred_count[c.idx] == 0) heads.add(c.idx);
    }
  };

  std::vector<CandidateIndex::Candidate> candidates;
  std::vector<CandidateIndex::Candidate> feasible;
  while (index.live_count() > 0) {
    const TripIdx start =
        heads.empty() ? pick_start(index.live_trips(), rng) : pick_start(heads.view(), rng);

    DriverRoute route;
    route.driver_id = static_cast<uint32_t>(result.routes.size());
    route.trips.push_back(start);
    consume(start, candidates);

    const int64_t session_start = trips[start].start_ts;
    while (true) {
      if (route.trips.size() >= static_cast<size_t>(params.max_trips)) {
        ++result.stats.max_trips_stops;
        break;
      }
      feasible.clear();
      for (const auto& c : candidates) {
        if (trips[c.idx].end_ts - session_start <= session_s) feasible.push_back(c);
        else ++result.stats.session_filtered_candidates;
      }
      if (feasible.empty()) {
        ++result.stats.empty_candidate_stops;
        break;
      }
      const TripIdx next = pick_next(feasible, params.top_k, rng);
      route.trips.push_back(next);
      consume(next, candidates);
    }

    route.day = date_of(trips[route.trips.front()].start_ts);
    for (TripIdx t : route.trips) {
      route.income_cents += trips[t].total_cents;
      route.fare_cents += trips[t].fare_cents;
      route.driving_seconds += trips[t].duration_s;
    }
    ++result.stats.route_length_hist[static_cast<uint32_t>(route.trips.size())];
    if (route.trips.size() == 1) ++result.stats.singleton_routes;
    result.routes.push_back(std::move(route));
  }
  result.stats.total_drivers = result.routes.size();
  result.stats.partitions = 1;
  return result;
}

}  // namespace

SimOutput simulate(std::span<const TripRecord> trips, const SimParams& params) {
  params.validate();
  for (size_t i = 0; i < trips.size(); ++i) {
    if (!trips[i].pickup_centroid || !trips[i].dropoff_centroid)
      throw DataError("simulate: trip " + trips[i].trip_id + " is missing a centroid");
  }

  // Partitions in day order; each gets its own substream so the merged output
  // is independent of thread scheduling.
  std::vector<std::pair<uint64_t, std::vector<TripIdx>>> partitions;
  if (params.partition_by_day) {
    std::map<int64_t, std::vector<TripIdx>> by_day;
    for (size_t i = 0; i < trips.size(); ++i)
      by_day[epoch_day(trips[i].start_ts)].push_back(static_cast<TripIdx>(i));
    partitions.reserve(by_day.size());
    for (auto& [day, idxs] : by_day)
      partitions.emplace_back(static_cast<uint64_t>(day), std::move(idxs));
  } else {
    std::vector<TripIdx> all(trips.size());
    for (size_t i = 0; i < trips.size(); ++i) all[i] = static_cast<TripIdx>(i);
    partitions.emplace_back(0, std::move(all));
  }

  std::vector<PartitionResult> results(partitions.size());
  unsigned n_threads = params.threads > 0 ? static_cast<unsigned>(params.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(partitions.size()));

  if (n_threads <= 1) {
    for (size_t p = 0; p < partitions.size(); ++p)
      results[p] = simulate_partition(trips, partitions[p].second, params, partitions[p].first);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      while (true) {
        const size_t p = next.fetch_add(1);
        if (p >= partitions.size()) return;
        results[p] = simulate_partition(trips, partitions[p].second, params, partitions[p].first);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SimOutput out;
  for (auto& r : results) {
    for (auto& route : r.routes) {
      route.driver_id = static_cast<uint32_t>(out.routes.size());
      out.routes.push_back(std::move(route));
    }
    out.stats.max_trips_stops += r.stats.max_trips_stops;
    out.stats.empty_candidate_stops += r.stats.empty_candidate_stops;
    out.stats.session_filtered_candidates += r.stats.session_filtered_candidates;
    out.stats.singleton_routes += r.stats.singleton_routes;
    for (const auto& [len, n] : r.stats.route_length_hist) out.stats.route_length_hist[len] += n;
  }
  out.stats.total_drivers = out.routes.size();
  out.stats.partitions = partitions.size();
  return out;
}

ValidationReport validate_routes(const SimOutput& output, std::span<const TripRecord> trips,
                                 const SimParams& params) {
  ValidationReport report;
  report.partition_ok = true;

  std::vector<uint8_t> seen(trips.size(), 0);
  size_t assigned = 0;
  const int64_t alpha_s = alpha_window_seconds(params.alpha_hours);
  const int64_t session_s = session_window_seconds(params.max_session_hours);

  for (size_t r = 0; r < output.routes.size(); ++r) {
    const DriverRoute& route = output.routes[r];
    if (route.driver_id != r) {
      report.partition_ok = false;
      report.message = "driver ids not dense";
    }
    if (route.trips.empty()) {
      report.partition_ok = false;
      report.message = "empty route";
      continue;
    }
    for (TripIdx t : route.trips) {
      if (t >= trips.size() || seen[t]) {
        report.partition_ok = false;
        report.message = "trip repeated or out of range";
      } else {
        seen[t] = 1;
        ++assigned;
      }
    }
    if (route.trips.size() > static_cast<size_t>(params.max_trips))
      report.violations.push_back({route.driver_id, route.trips.size() - 1, Constraint::max_trips});
    const int64_t span_s = trips[route.trips.back()].end_ts - trips[route.trips.front()].start_ts;
    if (span_s > session_s)
      report.violations.push_back({route.driver_id, route.trips.size() - 1, Constraint::session_hours});
    for (size_t i = 0; i + 1 < route.trips.size(); ++i) {
      const TripRecord& a = trips[route.trips[i]];
      const TripRecord& b = trips[route.trips[i + 1]];
      const int64_t gap = b.start_ts - a.end_ts;
      if (gap < 0 || gap > alpha_s) {
        report.violations.push_back({route.driver_id, i + 1, Constraint::temporal});
        continue;
      }
      if (!a.dropoff_centroid || !b.pickup_centroid ||
          haversine_miles(*a.dropoff_centroid, *b.pickup_centroid) > params.max_dist_mi)
        report.violations.push_back({route.driver_id, i + 1, Constraint::spatial});
    }
  }
  if (assigned != trips.size()) {
    report.partition_ok = false;
    if (report.message.empty()) report.message = "not all trips assigned";
  }
  report.ok = report.partition_ok && report.violations.empty();
  return report;
}

}  // namespace tripweave
