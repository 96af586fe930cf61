#include "stopspacing/feed.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iterator>
#include <sstream>

#include "stopspacing/csv.hpp"
#include "stopspacing/error.hpp"
#include "stopspacing/zip_archive.hpp"

namespace stopspacing {

namespace {

constexpr std::string_view kStopsFile = "stops.txt";
constexpr std::string_view kRoutesFile = "routes.txt";
constexpr std::string_view kTripsFile = "trips.txt";
constexpr std::string_view kStopTimesFile = "stop_times.txt";
constexpr std::string_view kShapesFile = "shapes.txt";
constexpr std::string_view kCalendarFile = "calendar.txt";
constexpr std::string_view kCalendarDatesFile = "calendar_dates.txt";
constexpr std::string_view kFrequenciesFile = "frequencies.txt";

// Raw file contents keyed by GTFS file name; absent files are nullopt.
struct FeedFiles {
  std::map<std::string, std::optional<std::string>, std::less<>> text;

  const std::optional<std::string>& get(std::string_view name) const {
    static const std::optional<std::string> none;
    auto it = text.find(name);
    return it == text.end() ? none : it->second;
  }
};

std::string read_whole_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

FeedFiles load_files(const std::filesystem::path& source) {
  static constexpr std::string_view kNames[] = {
      kStopsFile, kRoutesFile, kTripsFile, kStopTimesFile,
      kShapesFile, kCalendarFile, kCalendarDatesFile, kFrequenciesFile};
  FeedFiles files;
  std::error_code ec;
  if (!std::filesystem::exists(source, ec)) {
    throw Error(ErrorCode::io, "feed source does not exist: " + source.string());
  }
  if (std::filesystem::is_directory(source, ec)) {
    for (auto name : kNames) {
      const auto path = source / name;
      if (std::filesystem::is_regular_file(path, ec)) {
        files.text[std::string(name)] = read_whole_file(path);
      } else {
        files.text[std::string(name)] = std::nullopt;
      }
    }
    return files;
  }
  const zip::Archive archive = zip::Archive::open(source);
  for (auto name : kNames) {
    if (auto member = archive.find_by_basename(name)) {
      files.text[std::string(name)] = archive.read(*member);
    } else {
      files.text[std::string(name)] = std::nullopt;
    }
  }
  return files;
}

std::string strip_extension(std::string_view file) {
  return std::string(file.substr(0, file.rfind('.')));
}

std::string where(std::string_view file, std::size_t line) {
  std::ostringstream os;
  os << file << " line " << line;
  return os.str();
}

std::optional<bool> parse_flag(std::string_view s) {
  s = csv::trim(s);
  if (s == "1") return true;
  if (s == "0") return false;
  return std::nullopt;
}

// Accepts H:MM:SS with hours past 24.
std::optional<int> parse_gtfs_time(std::string_view s) {
  s = csv::trim(s);
  const auto first = s.find(':');
  const auto second = s.rfind(':');
  if (first == std::string_view::npos || first == second) return std::nullopt;
  const auto h = csv::parse_int(s.substr(0, first));
  const auto m = csv::parse_int(s.substr(first + 1, second - first - 1));
  const auto sec = csv::parse_int(s.substr(second + 1));
  if (!h || !m || !sec || *h < 0 || *m < 0 || *m > 59 || *sec < 0 || *sec > 59) {
    return std::nullopt;
  }
  return static_cast<int>(*h * 3600 + *m * 60 + *sec);
}

std::optional<double> parse_optional_distance(std::string_view s) {
  auto v = csv::parse_double(s);
  if (v && *v >= 0.0) return v;
  return std::nullopt;
}

// Result of parsing one file: rows plus the parse-stage failures.
template <typename Row>
struct Parsed {
  std::vector<Row> rows;
  std::size_t total_rows = 0;
  std::size_t failed_rows = 0;
  Diagnostics diagnostics;

  void fail(std::string_view file, std::size_t line, std::string why,
            std::string_view category = diag::kUnparseableRow) {
    ++failed_rows;
    diagnostics.add(category, file, where(file, line) + ": " + why);
  }
};

Parsed<Stop> parse_stops(std::string_view text) {
  Parsed<Stop> out;
  csv::Table table(text);
  const auto id_col = table.column("stop_id");
  const auto lat_col = table.column("stop_lat");
  const auto lon_col = table.column("stop_lon");
  const auto type_col = table.column("location_type");
  while (table.next()) {
    ++out.total_rows;
    const auto id = table.field(id_col);
    const auto lat = csv::parse_double(table.field(lat_col));
    const auto lon = csv::parse_double(table.field(lon_col));
    const auto location_type = csv::parse_int(table.field(type_col)).value_or(0);
    if (id.empty()) {
      out.fail(kStopsFile, table.line(), "missing stop_id");
      continue;
    }
    if (!lat || !lon) {
      // Generic nodes and boarding areas may legitimately lack coordinates.
      if (location_type == 3 || location_type == 4) {
        --out.total_rows;
        continue;
      }
      out.fail(kStopsFile, table.line(), "missing or invalid coordinates for stop " + std::string(id));
      continue;
    }
    GeoPoint p{*lat, *lon};
    if (!p.in_range()) {
      out.fail(kStopsFile, table.line(),
               "coordinates out of range for stop " + std::string(id));
      continue;
    }
    out.rows.push_back(Stop{std::string(id), p});
  }
  return out;
}

Parsed<Route> parse_routes(std::string_view text) {
  Parsed<Route> out;
  csv::Table table(text);
  const auto id_col = table.column("route_id");
  const auto type_col = table.column("route_type");
  while (table.next()) {
    ++out.total_rows;
    const auto id = table.field(id_col);
    const auto type = csv::parse_int(table.field(type_col));
    if (id.empty() || !type) {
      out.fail(kRoutesFile, table.line(), "missing route_id or route_type");
      continue;
    }
    out.rows.push_back(Route{std::string(id), static_cast<int>(*type)});
  }
  return out;
}

Parsed<Trip> parse_trips(std::string_view text) {
  Parsed<Trip> out;
  csv::Table table(text);
  const auto trip_col = table.column("trip_id");
  const auto route_col = table.column("route_id");
  const auto service_col = table.column("service_id");
  const auto shape_col = table.column("shape_id");
  const auto direction_col = table.column("direction_id");
  while (table.next()) {
    ++out.total_rows;
    Trip trip;
    trip.trip_id = std::string(table.field(trip_col));
    trip.route_id = std::string(table.field(route_col));
    trip.service_id = std::string(table.field(service_col));
    if (trip.trip_id.empty() || trip.route_id.empty() || trip.service_id.empty()) {
      out.fail(kTripsFile, table.line(), "missing trip_id, route_id or service_id");
      continue;
    }
    if (auto shape = table.field(shape_col); !shape.empty()) trip.shape_id = std::string(shape);
    const auto direction = table.field(direction_col);
    if (!direction.empty()) {
      auto flag = parse_flag(direction);
      if (!flag) {
        out.fail(kTripsFile, table.line(), "invalid direction_id for trip " + trip.trip_id);
        continue;
      }
      trip.direction_id = *flag ? 1 : 0;
    }
    out.rows.push_back(std::move(trip));
  }
  return out;
}

Parsed<StopTime> parse_stop_times(std::string_view text) {
  Parsed<StopTime> out;
  csv::Table table(text);
  const auto trip_col = table.column("trip_id");
  const auto stop_col = table.column("stop_id");
  const auto seq_col = table.column("stop_sequence");
  const auto dist_col = table.column("shape_dist_traveled");
  while (table.next()) {
    ++out.total_rows;
    const auto trip = table.field(trip_col);
    const auto stop = table.field(stop_col);
    const auto seq = csv::parse_int(table.field(seq_col));
    if (trip.empty() || stop.empty() || !seq || *seq < 0 || *seq > 0xffffffffLL) {
      out.fail(kStopTimesFile, table.line(), "missing trip_id, stop_id or stop_sequence");
      continue;
    }
    out.rows.push_back(StopTime{std::string(trip), std::string(stop),
                                static_cast<std::uint32_t>(*seq),
                                parse_optional_distance(table.field(dist_col))});
  }
  return out;
}

Parsed<ShapePoint> parse_shapes(std::string_view text) {
  Parsed<ShapePoint> out;
  csv::Table table(text);
  const auto id_col = table.column("shape_id");
  const auto lat_col = table.column("shape_pt_lat");
  const auto lon_col = table.column("shape_pt_lon");
  const auto seq_col = table.column("shape_pt_sequence");
  const auto dist_col = table.column("shape_dist_traveled");
  while (table.next()) {
    ++out.total_rows;
    const auto id = table.field(id_col);
    const auto lat = csv::parse_double(table.field(lat_col));
    const auto lon = csv::parse_double(table.field(lon_col));
    const auto seq = csv::parse_int(table.field(seq_col));
    if (id.empty() || !lat || !lon || !seq || *seq < 0 || *seq > 0xffffffffLL ||
        !GeoPoint{*lat, *lon}.in_range()) {
      out.fail(kShapesFile, table.line(), "invalid shape point");
      continue;
    }
    out.rows.push_back(ShapePoint{std::string(id), GeoPoint{*lat, *lon},
                                  static_cast<std::uint32_t>(*seq),
                                  parse_optional_distance(table.field(dist_col))});
  }
  return out;
}

Parsed<ServiceWindow> parse_calendar(std::string_view text) {
  static constexpr std::string_view kDays[] = {"monday", "tuesday", "wednesday", "thursday",
                                               "friday", "saturday", "sunday"};
  Parsed<ServiceWindow> out;
  csv::Table table(text);
  while (table.next()) {
    ++out.total_rows;
    ServiceWindow w;
    w.service_id = std::string(table.field("service_id"));
    bool ok = !w.service_id.empty();
    for (std::size_t d = 0; d < 7 && ok; ++d) {
      auto flag = parse_flag(table.field(kDays[d]));
      ok = flag.has_value();
      if (ok) w.weekdays[d] = *flag;
    }
    const auto start = ServiceDate::parse(table.field("start_date"));
    const auto end = ServiceDate::parse(table.field("end_date"));
    if (!ok || !start || !end) {
      out.fail(kCalendarFile, table.line(), "invalid calendar row");
      continue;
    }
    if (*start > *end) {
      out.fail(kCalendarFile, table.line(),
               "start_date after end_date for service " + w.service_id, "invalid_calendar");
      continue;
    }
    w.start_date = *start;
    w.end_date = *end;
    out.rows.push_back(std::move(w));
  }
  return out;
}

Parsed<ServiceException> parse_calendar_dates(std::string_view text) {
  Parsed<ServiceException> out;
  csv::Table table(text);
  while (table.next()) {
    ++out.total_rows;
    const auto service = table.field("service_id");
    const auto date = ServiceDate::parse(table.field("date"));
    const auto type = csv::parse_int(table.field("exception_type"));
    if (service.empty() || !date || !type || (*type != 1 && *type != 2)) {
      out.fail(kCalendarDatesFile, table.line(), "invalid calendar_dates row");
      continue;
    }
    out.rows.push_back(ServiceException{
        std::string(service), *date, *type == 1 ? ExceptionType::added : ExceptionType::removed});
  }
  return out;
}

Parsed<FrequencySpan> parse_frequencies(std::string_view text) {
  Parsed<FrequencySpan> out;
  csv::Table table(text);
  while (table.next()) {
    ++out.total_rows;
    const auto trip = table.field("trip_id");
    const auto start = parse_gtfs_time(table.field("start_time"));
    const auto end = parse_gtfs_time(table.field("end_time"));
    const auto headway = csv::parse_int(table.field("headway_secs"));
    if (trip.empty() || !start || !end || !headway) {
      out.fail(kFrequenciesFile, table.line(), "invalid frequencies row");
      continue;
    }
    if (*headway <= 0 || *end < *start) {
      out.fail(kFrequenciesFile, table.line(),
               "non-positive headway or reversed window for trip " + std::string(trip),
               "invalid_frequency");
      continue;
    }
    const bool exact = parse_flag(table.field("exact_times")).value_or(false);
    out.rows.push_back(FrequencySpan{std::string(trip), *start, *end,
                                     static_cast<int>(*headway), exact});
  }
  return out;
}

template <typename Row>
Parsed<Row> parse_optional(const FeedFiles& files, std::string_view name,
                           Parsed<Row> (*parser)(std::string_view)) {
  const auto& text = files.get(name);
  if (!text) return {};
  return parser(*text);
}

void check_ratio(std::string_view file, std::size_t failed, std::size_t total) {
  if (total > 0 && failed * 2 > total) {
    throw Error(ErrorCode::malformed_row,
                std::string(file) + ": " + std::to_string(failed) + " of " +
                    std::to_string(total) + " rows failed to parse");
  }
}

template <typename Row, typename Key>
std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> index_ranges(
    const std::vector<Row>& rows, Key key) {
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> ranges;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= rows.size(); ++i) {
    if (i == rows.size() || key(rows[i]) != key(rows[begin])) {
      ranges.emplace(key(rows[begin]), std::make_pair(begin, i));
      begin = i;
    }
  }
  return ranges;
}

}  // namespace

void Diagnostics::add(std::string_view category, std::string_view file, std::string detail) {
  auto it = counts_.find(category);
  if (it == counts_.end()) it = counts_.emplace(std::string(category), 0).first;
  ++it->second;
  if (it->second <= kMaxDetailsPerCategory) {
    entries_.push_back(Entry{std::string(category), std::string(file), std::move(detail)});
  }
}

void Diagnostics::merge(const Diagnostics& other) {
  for (const auto& [category, n] : other.counts_) {
    auto it = counts_.find(category);
    const std::size_t before = it == counts_.end() ? 0 : it->second;
    counts_[category] = before + n;
    std::size_t kept = before;
    for (const auto& e : other.entries_) {
      if (e.category == category && kept < kMaxDetailsPerCategory) {
        entries_.push_back(e);
        ++kept;
      }
    }
  }
}

std::size_t Diagnostics::count(std::string_view category) const {
  auto it = counts_.find(category);
  return it == counts_.end() ? 0 : it->second;
}

std::size_t Diagnostics::total() const {
  std::size_t n = 0;
  for (const auto& [category, c] : counts_) n += c;
  return n;
}

std::string Diagnostics::to_text() const {
  std::ostringstream os;
  for (const auto& [category, n] : counts_) os << category << '\t' << n << '\n';
  for (const auto& e : entries_) os << "  [" << e.category << "] " << e.detail << '\n';
  return os.str();
}

class FeedBuilder {
 public:
  static FeedBundle build(const std::filesystem::path& source);
};

FeedBundle FeedBuilder::build(const std::filesystem::path& source) {
  const FeedFiles files = load_files(source);

  for (auto name : {kStopsFile, kRoutesFile, kTripsFile, kStopTimesFile}) {
    if (!files.get(name)) {
      throw Error(ErrorCode::missing_required_file,
                  "missing required GTFS file: " + strip_extension(name));
    }
  }
  if (!files.get(kCalendarFile) && !files.get(kCalendarDatesFile)) {
    throw Error(ErrorCode::no_service_info,
                "feed has neither calendar.txt nor calendar_dates.txt");
  }

  // Files are independent until the referential merge below.
  auto stops_f = std::async(std::launch::async, parse_stops, std::string_view(*files.get(kStopsFile)));
  auto routes_f = std::async(std::launch::async, parse_routes, std::string_view(*files.get(kRoutesFile)));
  auto trips_f = std::async(std::launch::async, parse_trips, std::string_view(*files.get(kTripsFile)));
  auto stop_times_f =
      std::async(std::launch::async, parse_stop_times, std::string_view(*files.get(kStopTimesFile)));
  auto shapes_f = std::async(std::launch::async, [&] {
    return parse_optional<ShapePoint>(files, kShapesFile, parse_shapes);
  });
  auto calendar = parse_optional<ServiceWindow>(files, kCalendarFile, parse_calendar);
  auto calendar_dates =
      parse_optional<ServiceException>(files, kCalendarDatesFile, parse_calendar_dates);
  auto frequencies = parse_optional<FrequencySpan>(files, kFrequenciesFile, parse_frequencies);

  auto stops = stops_f.get();
  auto routes = routes_f.get();
  auto trips = trips_f.get();
  auto stop_times = stop_times_f.get();
  auto shapes = shapes_f.get();

  check_ratio(kStopsFile, stops.failed_rows, stops.total_rows);
  check_ratio(kRoutesFile, routes.failed_rows, routes.total_rows);
  check_ratio(kTripsFile, trips.failed_rows, trips.total_rows);
  check_ratio(kStopTimesFile, stop_times.failed_rows, stop_times.total_rows);

  FeedBundle feed;
  feed.source_name_ = source.filename().empty() ? source.parent_path().filename().string()
                                                : source.stem().string();
  feed.has_calendar_ = files.get(kCalendarFile).has_value();
  feed.has_calendar_dates_ = files.get(kCalendarDatesFile).has_value();
  Diagnostics& diag = feed.diagnostics_;
  for (auto* d : {&stops.diagnostics, &routes.diagnostics, &trips.diagnostics,
                  &stop_times.diagnostics, &shapes.diagnostics, &calendar.diagnostics,
                  &calendar_dates.diagnostics, &frequencies.diagnostics}) {
    diag.merge(*d);
  }

  for (auto& stop : stops.rows) {
    if (feed.stop_index_.contains(stop.stop_id)) {
      diag.add(diag::kDuplicateId, kStopsFile, "duplicate stop_id " + stop.stop_id);
      continue;
    }
    feed.stop_index_.emplace(stop.stop_id, feed.stops_.size());
    feed.stops_.push_back(std::move(stop));
  }
  for (auto& route : routes.rows) {
    if (feed.route_index_.contains(route.route_id)) {
      diag.add(diag::kDuplicateId, kRoutesFile, "duplicate route_id " + route.route_id);
      continue;
    }
    feed.route_index_.emplace(route.route_id, feed.routes_.size());
    feed.routes_.push_back(std::move(route));
  }
  for (auto& trip : trips.rows) {
    if (!feed.route_index_.contains(trip.route_id)) {
      diag.add(diag::kUnknownRoute, kTripsFile,
               "trip " + trip.trip_id + " references unknown route " + trip.route_id);
      continue;
    }
    if (feed.trip_index_.contains(trip.trip_id)) {
      diag.add(diag::kDuplicateId, kTripsFile, "duplicate trip_id " + trip.trip_id);
      continue;
    }
    feed.trip_index_.emplace(trip.trip_id, feed.trips_.size());
    feed.trips_.push_back(std::move(trip));
  }

  for (auto& st : stop_times.rows) {
    if (!feed.trip_index_.contains(st.trip_id)) {
      diag.add(diag::kUnknownTrip, kStopTimesFile, "stop_time references unknown trip " + st.trip_id);
      continue;
    }
    if (!feed.stop_index_.contains(st.stop_id)) {
      diag.add(diag::kUnknownStop, kStopTimesFile, "stop_time references unknown stop " + st.stop_id);
      continue;
    }
    feed.stop_times_.push_back(std::move(st));
  }
  std::stable_sort(feed.stop_times_.begin(), feed.stop_times_.end(),
                   [](const StopTime& a, const StopTime& b) {
                     return std::tie(a.trip_id, a.stop_sequence) < std::tie(b.trip_id, b.stop_sequence);
                   });
  {
    std::vector<StopTime> unique;
    unique.reserve(feed.stop_times_.size());
    for (auto& st : feed.stop_times_) {
      if (!unique.empty() && unique.back().trip_id == st.trip_id &&
          unique.back().stop_sequence == st.stop_sequence) {
        diag.add(diag::kDuplicateSequence, kStopTimesFile,
                 "duplicate stop_sequence " + std::to_string(st.stop_sequence) + " in trip " + st.trip_id);
        continue;
      }
      unique.push_back(std::move(st));
    }
    feed.stop_times_ = std::move(unique);
  }

  feed.shape_points_ = std::move(shapes.rows);
  std::stable_sort(feed.shape_points_.begin(), feed.shape_points_.end(),
                   [](const ShapePoint& a, const ShapePoint& b) {
                     return std::tie(a.shape_id, a.sequence) < std::tie(b.shape_id, b.sequence);
                   });
  {
    std::vector<ShapePoint> unique;
    unique.reserve(feed.shape_points_.size());
    for (auto& sp : feed.shape_points_) {
      if (!unique.empty() && unique.back().shape_id == sp.shape_id &&
          unique.back().sequence == sp.sequence) {
        diag.add(diag::kDuplicateSequence, kShapesFile,
                 "duplicate shape_pt_sequence " + std::to_string(sp.sequence) + " in shape " + sp.shape_id);
        continue;
      }
      unique.push_back(std::move(sp));
    }
    feed.shape_points_ = std::move(unique);
  }

  feed.calendar_ = std::move(calendar.rows);
  feed.calendar_dates_ = std::move(calendar_dates.rows);

  for (auto& f : frequencies.rows) {
    if (!feed.trip_index_.contains(f.trip_id)) {
      diag.add(diag::kUnknownTrip, kFrequenciesFile, "frequency references unknown trip " + f.trip_id);
      continue;
    }
    feed.frequencies_.push_back(std::move(f));
  }
  std::stable_sort(feed.frequencies_.begin(), feed.frequencies_.end(),
                   [](const FrequencySpan& a, const FrequencySpan& b) {
                     return std::tie(a.trip_id, a.start_time_s) < std::tie(b.trip_id, b.start_time_s);
                   });

  feed.stop_time_ranges_ = index_ranges(feed.stop_times_, [](const StopTime& s) { return s.trip_id; });
  feed.shape_ranges_ = index_ranges(feed.shape_points_, [](const ShapePoint& s) { return s.shape_id; });
  feed.frequency_ranges_ =
      index_ranges(feed.frequencies_, [](const FrequencySpan& f) { return f.trip_id; });
  return feed;
}

FeedBundle parse_feed(const std::filesystem::path& source) { return FeedBuilder::build(source); }

const Stop* FeedBundle::find_stop(std::string_view stop_id) const {
  auto it = stop_index_.find(std::string(stop_id));
  return it == stop_index_.end() ? nullptr : &stops_[it->second];
}

const Route* FeedBundle::find_route(std::string_view route_id) const {
  auto it = route_index_.find(std::string(route_id));
  return it == route_index_.end() ? nullptr : &routes_[it->second];
}

const Trip* FeedBundle::find_trip(std::string_view trip_id) const {
  auto it = trip_index_.find(std::string(trip_id));
  return it == trip_index_.end() ? nullptr : &trips_[it->second];
}

std::span<const StopTime> FeedBundle::stop_times_for(std::string_view trip_id) const {
  auto it = stop_time_ranges_.find(std::string(trip_id));
  if (it == stop_time_ranges_.end()) return {};
  return std::span<const StopTime>(stop_times_).subspan(it->second.first,
                                                       it->second.second - it->second.first);
}

std::span<const ShapePoint> FeedBundle::shape_points_for(std::string_view shape_id) const {
  auto it = shape_ranges_.find(std::string(shape_id));
  if (it == shape_ranges_.end()) return {};
  return std::span<const ShapePoint>(shape_points_)
      .subspan(it->second.first, it->second.second - it->second.first);
}

std::span<const FrequencySpan> FeedBundle::frequencies_for(std::string_view trip_id) const {
  auto it = frequency_ranges_.find(std::string(trip_id));
  if (it == frequency_ranges_.end()) return {};
  return std::span<const FrequencySpan>(frequencies_)
      .subspan(it->second.first, it->second.second - it->second.first);
}

std::vector<ValidationIssue> validate_feed(const FeedBundle& feed) {
  std::vector<ValidationIssue> issues;
  for (const auto& trip : feed.trips()) {
    if (!trip.shape_id || feed.shape_points_for(*trip.shape_id).empty()) {
      issues.push_back({std::string(issue::kTripLacksShape), trip.trip_id});
    }
  }
  std::string previous;
  std::size_t run = 0;
  const auto shapes = feed.shapes();
  for (std::size_t i = 0; i <= shapes.size(); ++i) {
    if (i == shapes.size() || (run > 0 && shapes[i].shape_id != previous)) {
      if (run > 0 && run < 2) issues.push_back({std::string(issue::kShapeTooShort), previous});
      run = 0;
    }
    if (i < shapes.size()) {
      previous = shapes[i].shape_id;
      ++run;
    }
  }
  for (const auto& stop : feed.stops()) {
    if (!stop.position.in_range()) {
      issues.push_back({std::string(issue::kStopOutOfRange), stop.stop_id});
    }
  }
  return issues;
}

std::string validation_report_text(std::span<const ValidationIssue> issues) {
  std::ostringstream os;
  for (const auto& i : issues) os << i.kind << '\t' << i.id << '\n';
  return os.str();
}

}  // namespace stopspacing
