#include "tripweave/ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "tripweave/csv.hpp"
#include "tripweave/errors.hpp"
#include "tripweave/money.hpp"
#include "tripweave/region.hpp"

namespace tripweave {

namespace {

struct ColumnIdx {
  int trip_id, start_ts, end_ts, seconds, miles;
  int pickup_area, dropoff_area;
  int pickup_lat, pickup_lon, dropoff_lat, dropoff_lon;
  int fare, tip, extras, total;
};

int find_column(const std::vector<std::string>& header, const std::string& name, std::string& missing) {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  if (!missing.empty()) missing += ", ";
  missing += "\"" + name + "\"";
  return -1;
}

ColumnIdx resolve_columns(const std::vector<std::string>& header, const SchemaConfig& s) {
  std::string missing;
  ColumnIdx c{};
  c.trip_id = find_column(header, s.trip_id, missing);
  c.start_ts = find_column(header, s.start_ts, missing);
  c.end_ts = find_column(header, s.end_ts, missing);
  c.seconds = find_column(header, s.seconds, missing);
  c.miles = find_column(header, s.miles, missing);
  c.pickup_area = find_column(header, s.pickup_area, missing);
  c.dropoff_area = find_column(header, s.dropoff_area, missing);
  c.pickup_lat = find_column(header, s.pickup_lat, missing);
  c.pickup_lon = find_column(header, s.pickup_lon, missing);
  c.dropoff_lat = find_column(header, s.dropoff_lat, missing);
  c.dropoff_lon = find_column(header, s.dropoff_lon, missing);
  c.fare = find_column(header, s.fare, missing);
  c.tip = find_column(header, s.tip, missing);
  c.extras = find_column(header, s.extras, missing);
  c.total = find_column(header, s.total, missing);
  if (!missing.empty()) throw ConfigError("missing header column(s): " + missing);
  return c;
}

bool blank(const std::string& s) {
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

bool centroid_in_bounds(const GeoPoint& p) {
  return p.lat >= kMinLat && p.lat <= kMaxLat && p.lon >= kMinLon && p.lon <= kMaxLon;
}

// Parses one row; on rejection returns the reason key.
const char* parse_row(const std::vector<std::string>& row, const ColumnIdx& c, const SchemaConfig& schema,
                      const ParseOptions& options, TripRecord& out) {
  auto field = [&](int idx) -> const std::string& { return row[static_cast<size_t>(idx)]; };

  out.trip_id = field(c.trip_id);

  auto start = blank(field(c.start_ts)) ? std::nullopt : parse_timestamp(field(c.start_ts), schema.ts_format);
  auto end = blank(field(c.end_ts)) ? std::nullopt : parse_timestamp(field(c.end_ts), schema.ts_format);
  if (!start || !end) return reject::timestamp;
  if (*end < *start) return reject::end_before_start;
  out.start_ts = *start;
  out.end_ts = *end;

  auto secs = parse_int(field(c.seconds));
  if (!secs || *secs < 0) return reject::bad_field;
  out.duration_s = *secs;

  auto miles = parse_double(field(c.miles));
  if (!miles || *miles < 0 || !std::isfinite(*miles)) return reject::bad_field;
  out.distance_mi = *miles;

  auto read_area = [&](int idx, std::optional<int>& dest) -> const char* {
    if (blank(field(idx))) {
      dest.reset();
      return nullptr;
    }
    auto v = parse_int(field(idx));
    if (!v || *v < 1 || *v > kNumCommunityAreas) return reject::bad_area;
    dest = static_cast<int>(*v);
    return nullptr;
  };
  if (const char* r = read_area(c.pickup_area, out.pickup_area)) return r;
  if (const char* r = read_area(c.dropoff_area, out.dropoff_area)) return r;

  auto read_centroid = [&](int lat_idx, int lon_idx, std::optional<GeoPoint>& dest) -> const char* {
    const bool lat_blank = blank(field(lat_idx)), lon_blank = blank(field(lon_idx));
    if (lat_blank && lon_blank) {
      dest.reset();
      return nullptr;
    }
    if (lat_blank != lon_blank) return reject::bad_field;  // half a centroid
    auto lat = parse_double(field(lat_idx));
    auto lon = parse_double(field(lon_idx));
    if (!lat || !lon || !std::isfinite(*lat) || !std::isfinite(*lon)) return reject::bad_field;
    GeoPoint p{*lat, *lon};
    if (!centroid_in_bounds(p)) return reject::centroid_bounds;
    dest = p;
    return nullptr;
  };
  if (const char* r = read_centroid(c.pickup_lat, c.pickup_lon, out.pickup_centroid)) return r;
  if (const char* r = read_centroid(c.dropoff_lat, c.dropoff_lon, out.dropoff_centroid)) return r;

  auto read_money = [&](int idx, int64_t& dest) -> const char* {
    auto v = parse_money_cents(field(idx));
    if (!v) return reject::bad_field;
    if (*v < 0) return reject::negative_money;
    dest = *v;
    return nullptr;
  };
  if (const char* r = read_money(c.fare, out.fare_cents)) return r;
  if (const char* r = read_money(c.tip, out.tip_cents)) return r;
  if (const char* r = read_money(c.extras, out.extras_cents)) return r;
  if (const char* r = read_money(c.total, out.total_cents)) return r;

  const int64_t parts = out.fare_cents + out.tip_cents + out.extras_cents;
  if (std::llabs(out.total_cents - parts) > kMoneyMismatchCents) return reject::money_mismatch;

  if (options.require_geography) {
    const bool pickup_known = out.pickup_area.has_value() || out.pickup_centroid.has_value();
    const bool dropoff_known = out.dropoff_area.has_value() || out.dropoff_centroid.has_value();
    if (!pickup_known || !dropoff_known) return reject::missing_geography;
  }
  return nullptr;
}

}  // namespace

void for_each_trip(std::istream& in, const SchemaConfig& schema, const ParseOptions& options,
                   IngestStats& stats, const std::function<void(TripRecord&&)>& sink) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row)) throw ConfigError("empty input: no header row");
  const ColumnIdx columns = resolve_columns(row, schema);
  const size_t min_width = [&] {
    size_t w = 0;
    for (int idx : {columns.trip_id, columns.start_ts, columns.end_ts, columns.seconds, columns.miles,
                    columns.pickup_area, columns.dropoff_area, columns.pickup_lat, columns.pickup_lon,
                    columns.dropoff_lat, columns.dropoff_lon, columns.fare, columns.tip, columns.extras,
                    columns.total})
      w = std::max(w, static_cast<size_t>(idx) + 1);
    return w;
  }();

  TripRecord record;
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // trailing blank line
    ++stats.rows_read;
    if (row.size() < min_width) {
      ++stats.rejects_by_reason[reject::bad_field];
      continue;
    }
    if (const char* reason = parse_row(row, columns, schema, options, record)) {
      ++stats.rejects_by_reason[reason];
      continue;
    }
    ++stats.rows_accepted;
    sink(std::move(record));
    record = TripRecord{};
  }
}

std::pair<std::vector<TripRecord>, IngestStats> parse_trips(std::istream& in, const SchemaConfig& schema,
                                                            const ParseOptions& options) {
  std::vector<TripRecord> trips;
  IngestStats stats;
  for_each_trip(in, schema, options, stats, [&](TripRecord&& t) { trips.push_back(std::move(t)); });
  return {std::move(trips), stats};
}

std::pair<std::vector<TripRecord>, IngestStats> parse_trips_file(const std::filesystem::path& path,
                                                                 const SchemaConfig& schema,
                                                                 const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trips file: " + path.string());
  return parse_trips(in, schema, options);
}

void write_trips_csv(std::ostream& out, std::span<const TripRecord> trips, const SchemaConfig& s) {
  const std::vector<std::string> header = {s.trip_id,     s.start_ts,    s.end_ts,      s.seconds,
                                           s.miles,       s.pickup_area, s.dropoff_area, s.pickup_lat,
                                           s.pickup_lon,  s.dropoff_lat, s.dropoff_lon, s.fare,
                                           s.tip,         s.extras,      s.total};
  write_csv_row(out, header);

  std::vector<std::string> row(header.size());
  for (const TripRecord& t : trips) {
    row[0] = t.trip_id;
    row[1] = format_timestamp(t.start_ts, s.ts_format);
    row[2] = format_timestamp(t.end_ts, s.ts_format);
    row[3] = std::to_string(t.duration_s);
    row[4] = format_double(t.distance_mi);
    row[5] = t.pickup_area ? std::to_string(*t.pickup_area) : "";
    row[6] = t.dropoff_area ? std::to_string(*t.dropoff_area) : "";
    row[7] = t.pickup_centroid ? format_double(t.pickup_centroid->lat) : "";
    row[8] = t.pickup_centroid ? format_double(t.pickup_centroid->lon) : "";
    row[9] = t.dropoff_centroid ? format_double(t.dropoff_centroid->lat) : "";
    row[10] = t.dropoff_centroid ? format_double(t.dropoff_centroid->lon) : "";
    row[11] = format_money(t.fare_cents);
    row[12] = format_money(t.tip_cents);
    row[13] = format_money(t.extras_cents);
    row[14] = format_money(t.total_cents);
    write_csv_row(out, row);
  }
}

}  // namespace tripweave
