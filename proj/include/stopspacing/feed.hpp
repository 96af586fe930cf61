#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stopspacing/geometry.hpp"
#include "stopspacing/service_date.hpp"

namespace stopspacing {

struct Stop {
  std::string stop_id;
  GeoPoint position;
};

struct Route {
  std::string route_id;
  int route_type = 3;
};

struct Trip {
  std::string trip_id;
  std::string route_id;
  std::string service_id;
  std::optional<std::string> shape_id;
  int direction_id = 0;
};

struct StopTime {
  std::string trip_id;
  std::string stop_id;
  std::uint32_t stop_sequence = 0;
  std::optional<double> shape_dist_traveled;
};

struct ShapePoint {
  std::string shape_id;
  GeoPoint position;
  std::uint32_t sequence = 0;
  std::optional<double> shape_dist_traveled;
};

struct ServiceWindow {
  std::string service_id;
  std::array<bool, 7> weekdays{};  // Monday first
  ServiceDate start_date;
  ServiceDate end_date;
};

enum class ExceptionType { added = 1, removed = 2 };

struct ServiceException {
  std::string service_id;
  ServiceDate date;
  ExceptionType type = ExceptionType::added;
};

struct FrequencySpan {
  std::string trip_id;
  int start_time_s = 0;
  int end_time_s = 0;
  int headway_secs = 0;
  bool exact_times = false;
};

// Row-level problems found while parsing or processing. Counts are exact;
// only the first few details per category are retained.
class Diagnostics {
 public:
  struct Entry {
    std::string category;
    std::string file;
    std::string detail;
  };

  static constexpr std::size_t kMaxDetailsPerCategory = 20;

  void add(std::string_view category, std::string_view file, std::string detail);
  void merge(const Diagnostics& other);

  std::size_t count(std::string_view category) const;
  std::size_t total() const;
  bool empty() const { return counts_.empty(); }
  const std::map<std::string, std::size_t, std::less<>>& counts() const { return counts_; }
  const std::vector<Entry>& entries() const { return entries_; }

  // One "category<TAB>count" line per category followed by retained details.
  std::string to_text() const;

 private:
  std::map<std::string, std::size_t, std::less<>> counts_;
  std::vector<Entry> entries_;
};

// Diagnostic categories for rows dropped during parsing.
namespace diag {
inline constexpr std::string_view kUnparseableRow = "unparseable_row";
inline constexpr std::string_view kDuplicateId = "duplicate_id";
inline constexpr std::string_view kUnknownRoute = "unknown_route";
inline constexpr std::string_view kUnknownTrip = "unknown_trip";
inline constexpr std::string_view kUnknownStop = "unknown_stop";
inline constexpr std::string_view kDuplicateSequence = "duplicate_sequence";
}  // namespace diag

class FeedBundle;

// Reads a GTFS zip archive or a directory of GTFS text files.
//
// Rows that fail to parse or that reference unknown routes, trips or stops
// are dropped and counted in diagnostics(). Throws
//   Error(missing_required_file) naming the file when stops, routes, trips or
//     stop_times is absent,
//   Error(malformed_row) when more than half the rows of a required file fail
//     to parse,
//   Error(no_service_info) when both calendar.txt and calendar_dates.txt are
//     absent.
FeedBundle parse_feed(const std::filesystem::path& source);

// Parsed GTFS tables. Built only by parse_feed; immutable afterwards, so it is
// safe to share between threads.
class FeedBundle {
 public:
  const std::string& source_name() const { return source_name_; }

  std::span<const Stop> stops() const { return stops_; }
  std::span<const Route> routes() const { return routes_; }
  std::span<const Trip> trips() const { return trips_; }
  // Ordered by (trip_id, stop_sequence).
  std::span<const StopTime> stop_times() const { return stop_times_; }
  // Ordered by (shape_id, shape_pt_sequence).
  std::span<const ShapePoint> shapes() const { return shape_points_; }
  std::span<const ServiceWindow> calendar() const { return calendar_; }
  std::span<const ServiceException> calendar_dates() const { return calendar_dates_; }
  std::span<const FrequencySpan> frequencies() const { return frequencies_; }

  bool has_calendar_file() const { return has_calendar_; }
  bool has_calendar_dates_file() const { return has_calendar_dates_; }

  const Stop* find_stop(std::string_view stop_id) const;
  const Route* find_route(std::string_view route_id) const;
  const Trip* find_trip(std::string_view trip_id) const;

  std::span<const StopTime> stop_times_for(std::string_view trip_id) const;
  std::span<const ShapePoint> shape_points_for(std::string_view shape_id) const;
  std::span<const FrequencySpan> frequencies_for(std::string_view trip_id) const;

  // Rows dropped while parsing, by category.
  const Diagnostics& diagnostics() const { return diagnostics_; }

 private:
  friend FeedBundle parse_feed(const std::filesystem::path& source);
  friend class FeedBuilder;

  using Range = std::pair<std::size_t, std::size_t>;

  std::string source_name_;
  std::vector<Stop> stops_;
  std::vector<Route> routes_;
  std::vector<Trip> trips_;
  std::vector<StopTime> stop_times_;
  std::vector<ShapePoint> shape_points_;
  std::vector<ServiceWindow> calendar_;
  std::vector<ServiceException> calendar_dates_;
  std::vector<FrequencySpan> frequencies_;
  bool has_calendar_ = false;
  bool has_calendar_dates_ = false;

  std::unordered_map<std::string, std::size_t> stop_index_;
  std::unordered_map<std::string, std::size_t> route_index_;
  std::unordered_map<std::string, std::size_t> trip_index_;
  std::unordered_map<std::string, Range> stop_time_ranges_;
  std::unordered_map<std::string, Range> shape_ranges_;
  std::unordered_map<std::string, Range> frequency_ranges_;

  Diagnostics diagnostics_;
};

struct ValidationIssue {
  std::string kind;
  std::string id;
};

namespace issue {
inline constexpr std::string_view kTripLacksShape = "trip lacks shape";
inline constexpr std::string_view kShapeTooShort = "shape has fewer than 2 points";
inline constexpr std::string_view kStopOutOfRange = "stop coordinates out of range";
}  // namespace issue

// Consistency report over a parsed feed. Never modifies the feed.
std::vector<ValidationIssue> validate_feed(const FeedBundle& feed);
std::string validation_report_text(std::span<const ValidationIssue> issues);

}  // namespace stopspacing
