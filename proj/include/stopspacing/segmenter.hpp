#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stopspacing/feed.hpp"
#include "stopspacing/geometry.hpp"
#include "stopspacing/service_date.hpp"

namespace stopspacing {

// A stop-to-stop edge with its own geometry. segment_id is
// "{stop_id1}-{stop_id2}", with "-k" (k >= 2) appended for the k-th distinct
// geometry seen between the same pair of stops.
struct Segment {
  std::string segment_id;
  std::string stop_id1;
  std::string stop_id2;
  Path path;
  double spacing_m;
};

// One (segment, route, direction) combination and how many times that route
// traverses the segment on the measurement date.
struct SegmentRow {
  std::size_t segment_index;
  std::string segment_id;
  std::string stop_id1;
  std::string stop_id2;
  std::string route_id;
  int direction_id;
  std::uint64_t traversals;
  double distance_m;
};

struct SegmentTable {
  std::vector<Segment> segments;  // sorted by segment_id
  std::vector<SegmentRow> rows;   // sorted by (segment_id, route_id, direction_id)
  ServiceDate measurement_date;
  std::string feed_id;
  Diagnostics diagnostics;

  const Segment& segment(const SegmentRow& row) const { return segments[row.segment_index]; }
  std::uint64_t total_traversals() const;
  bool empty() const { return rows.empty(); }
};

// Diagnostic categories raised while segmenting.
namespace diag {
inline constexpr std::string_view kSnapResidualTooLarge = "snap_residual_too_large";
inline constexpr std::string_view kTripWithoutShape = "trip_without_shape";
inline constexpr std::string_view kTripTooFewStops = "trip_too_few_stop_times";
inline constexpr std::string_view kDegenerateSegment = "degenerate_segment";
inline constexpr std::string_view kNonBusTrip = "non_bus_trip";
}  // namespace diag

struct SnapOptions {
  // Offsets above this are reported as snap_residual_too_large.
  double residual_warning_m = 100.0;
  // Half-width of the search window around a shape_dist_traveled seed.
  double seed_window_m = 200.0;
};

struct SnapResult {
  std::vector<PathPosition> positions;
  std::vector<std::size_t> large_residual_stops;  // indices into the stop list
};

// Snaps stops in visiting order. Each stop is projected with the previous
// stop's distance along as the lower bound, so positions never decrease.
// When `seeds_m` holds a value for a stop, the search is also restricted to
// seed +/- seed_window_m.
SnapResult snap_trip_stops(const Path& shape, std::span<const GeoPoint> stops,
                           std::span<const std::optional<double>> seeds_m = {},
                           const SnapOptions& options = {});

struct TripSegment {
  std::string stop_id1;
  std::string stop_id2;
  Path path;
};

struct TripSegmentation {
  std::vector<std::string> stop_ids;
  std::vector<PathPosition> stop_positions;
  std::vector<TripSegment> segments;
  // No usable shape: the path is the polyline through the stops themselves.
  bool used_fallback_path = false;
  std::vector<std::size_t> large_residual_stops;
  std::size_t degenerate_segments_dropped = 0;
};

// Splits one trip's shape at its snapped stops. The shape before the first
// stop and after the last stop is never part of any segment. Returns an
// empty segmentation for trips with fewer than two stop_times.
TripSegmentation segment_trip(const FeedBundle& feed, const Trip& trip,
                              const SnapOptions& options = {});

// Two traversals of the same stop pair share a segment when their vertex
// sequences match after rounding to 6 decimal degrees and their lengths
// differ by less than 1 m.
bool same_segment_geometry(const Path& a, const Path& b);

// Assigns segment ids to geometries in first-seen order.
class SegmentCatalog {
 public:
  // Index of the matching segment, adding a new one if none matches.
  std::size_t intern(const std::string& stop_id1, const std::string& stop_id2, const Path& path);

  const std::vector<Segment>& segments() const { return segments_; }
  std::vector<Segment> release() && { return std::move(segments_); }

 private:
  std::vector<Segment> segments_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_stop_pair_;
};

// Segment table for the bus trips active on `date`, with traversals
// expanded by frequencies.
SegmentTable extract_segments(const FeedBundle& feed, const ServiceDate& date,
                              const SnapOptions& options = {});

// Same, measured on the feed's busiest day.
SegmentTable extract_segments(const FeedBundle& feed, const SnapOptions& options = {});

}  // namespace stopspacing
