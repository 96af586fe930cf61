#include "stopspacing/segmenter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "stopspacing/calendar.hpp"

namespace stopspacing {

namespace {

constexpr double kSameLengthToleranceM = 1.0;
constexpr double kDegenerateLengthM = 1.0;

std::int64_t round_micro_degrees(double degrees) {
  return static_cast<std::int64_t>(std::llround(degrees * 1e6));
}

// Maps shape_dist_traveled values (feed units) to meters along the path when
// both the shape and the trip carry monotone values; otherwise no seeds.
std::vector<std::optional<double>> seeds_from_shape_dist(std::span<const ShapePoint> shape,
                                                         const Path& path,
                                                         std::span<const StopTime> stop_times) {
  std::vector<std::optional<double>> none;
  if (shape.size() < 2) return none;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (!shape[i].shape_dist_traveled) return none;
    if (i > 0 && *shape[i].shape_dist_traveled < *shape[i - 1].shape_dist_traveled) return none;
  }
  for (std::size_t i = 0; i < stop_times.size(); ++i) {
    if (!stop_times[i].shape_dist_traveled) return none;
    if (i > 0 && *stop_times[i].shape_dist_traveled < *stop_times[i - 1].shape_dist_traveled) {
      return none;
    }
  }
  const auto cumulative = path.cumulative_m();
  std::vector<std::optional<double>> seeds;
  seeds.reserve(stop_times.size());
  for (const auto& st : stop_times) {
    const double v = *st.shape_dist_traveled;
    if (v <= *shape.front().shape_dist_traveled) {
      seeds.emplace_back(0.0);
      continue;
    }
    if (v >= *shape.back().shape_dist_traveled) {
      seeds.emplace_back(path.length_m());
      continue;
    }
    std::size_t j = 1;
    while (j < shape.size() && *shape[j].shape_dist_traveled < v) ++j;
    const double d0 = *shape[j - 1].shape_dist_traveled;
    const double d1 = *shape[j].shape_dist_traveled;
    const double f = d1 > d0 ? (v - d0) / (d1 - d0) : 0.0;
    seeds.emplace_back(cumulative[j - 1] + f * (cumulative[j] - cumulative[j - 1]));
  }
  return seeds;
}

// Key identifying trips that segment identically.
std::string pattern_key(const Trip& trip, std::span<const StopTime> stop_times) {
  std::string key = trip.shape_id.value_or("");
  key.push_back('\x1e');
  for (const auto& st : stop_times) {
    key += st.stop_id;
    key.push_back('\x1f');
    if (st.shape_dist_traveled) key += std::to_string(*st.shape_dist_traveled);
    key.push_back('\x1f');
  }
  return key;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::uint64_t SegmentTable::total_traversals() const {
  std::uint64_t total = 0;
  for (const auto& row : rows) total += row.traversals;
  return total;
}

SnapResult snap_trip_stops(const Path& shape, std::span<const GeoPoint> stops,
                           std::span<const std::optional<double>> seeds_m,
                           const SnapOptions& options) {
  SnapResult result;
  result.positions.reserve(stops.size());
  double previous = 0.0;
  for (std::size_t i = 0; i < stops.size(); ++i) {
    double lo = previous;
    double hi = std::numeric_limits<double>::infinity();
    if (i < seeds_m.size() && seeds_m[i]) {
      lo = std::max(previous, *seeds_m[i] - options.seed_window_m);
      hi = std::max(lo, *seeds_m[i] + options.seed_window_m);
    }
    PathPosition pos = project_point_onto_path(shape, stops[i], lo, hi);
    pos.distance_along_m = std::max(pos.distance_along_m, previous);
    if (pos.offset_m > options.residual_warning_m) result.large_residual_stops.push_back(i);
    previous = pos.distance_along_m;
    result.positions.push_back(pos);
  }
  return result;
}

TripSegmentation segment_trip(const FeedBundle& feed, const Trip& trip, const SnapOptions& options) {
  TripSegmentation out;
  const auto stop_times = feed.stop_times_for(trip.trip_id);
  if (stop_times.size() < 2) return out;

  std::vector<GeoPoint> stop_points;
  stop_points.reserve(stop_times.size());
  for (const auto& st : stop_times) {
    out.stop_ids.push_back(st.stop_id);
    stop_points.push_back(feed.find_stop(st.stop_id)->position);
  }

  std::span<const ShapePoint> shape_points;
  if (trip.shape_id) shape_points = feed.shape_points_for(*trip.shape_id);

  std::optional<Path> path;
  std::vector<std::optional<double>> seeds;
  if (shape_points.size() >= 2) {
    std::vector<GeoPoint> pts;
    pts.reserve(shape_points.size());
    for (const auto& sp : shape_points) pts.push_back(sp.position);
    path.emplace(std::move(pts));
    seeds = seeds_from_shape_dist(shape_points, *path, stop_times);
    SnapResult snapped = snap_trip_stops(*path, stop_points, seeds, options);
    out.stop_positions = std::move(snapped.positions);
    out.large_residual_stops = std::move(snapped.large_residual_stops);
  } else {
    // Straight lines between consecutive stops; every stop sits on a vertex.
    out.used_fallback_path = true;
    path.emplace(stop_points);
    const auto cumulative = path->cumulative_m();
    for (std::size_t i = 0; i < stop_points.size(); ++i) {
      PathPosition pos;
      pos.segment_index = std::min(i, stop_points.size() - 2);
      pos.fraction = i + 1 == stop_points.size() ? 1.0 : 0.0;
      pos.distance_along_m = cumulative[i];
      out.stop_positions.push_back(pos);
    }
  }

  for (std::size_t i = 0; i + 1 < stop_times.size(); ++i) {
    Path piece = substring_path(*path, out.stop_positions[i].distance_along_m,
                                out.stop_positions[i + 1].distance_along_m);
    if (out.stop_ids[i] == out.stop_ids[i + 1] && piece.length_m() < kDegenerateLengthM) {
      ++out.degenerate_segments_dropped;
      continue;
    }
    out.segments.push_back(TripSegment{out.stop_ids[i], out.stop_ids[i + 1], std::move(piece)});
  }
  return out;
}

bool same_segment_geometry(const Path& a, const Path& b) {
  if (a.size() != b.size()) return false;
  if (std::abs(a.length_m() - b.length_m()) >= kSameLengthToleranceM) return false;
  const auto pa = a.points();
  const auto pb = b.points();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (round_micro_degrees(pa[i].lat) != round_micro_degrees(pb[i].lat) ||
        round_micro_degrees(pa[i].lon) != round_micro_degrees(pb[i].lon)) {
      return false;
    }
  }
  return true;
}

std::size_t SegmentCatalog::intern(const std::string& stop_id1, const std::string& stop_id2,
                                   const Path& path) {
  auto& candidates = by_stop_pair_[{stop_id1, stop_id2}];
  for (std::size_t index : candidates) {
    if (same_segment_geometry(segments_[index].path, path)) return index;
  }
  std::string id = stop_id1 + "-" + stop_id2;
  if (!candidates.empty()) id += "-" + std::to_string(candidates.size() + 1);
  const std::size_t index = segments_.size();
  segments_.push_back(Segment{std::move(id), stop_id1, stop_id2, path, path.length_m()});
  candidates.push_back(index);
  return index;
}

SegmentTable extract_segments(const FeedBundle& feed, const ServiceDate& date,
                              const SnapOptions& options) {
  SegmentTable table;
  table.measurement_date = date;
  table.feed_id = feed.source_name();

  const std::set<std::string> active = active_services(feed, date);

  std::vector<const Trip*> trips;
  for (const auto& trip : feed.trips()) {
    if (!active.contains(trip.service_id)) continue;
    const Route* route = feed.find_route(trip.route_id);
    if (route == nullptr || !is_bus_route_type(route->route_type)) {
      table.diagnostics.add(diag::kNonBusTrip, "trips.txt", "trip " + trip.trip_id + " is not a bus trip");
      continue;
    }
    if (feed.stop_times_for(trip.trip_id).size() < 2) {
      table.diagnostics.add(diag::kTripTooFewStops, "stop_times.txt",
                            "trip " + trip.trip_id + " has fewer than two stop_times");
      continue;
    }
    trips.push_back(&trip);
  }
  std::sort(trips.begin(), trips.end(),
            [](const Trip* a, const Trip* b) { return a->trip_id < b->trip_id; });

  // Trips sharing shape and stop pattern segment identically; do each once.
  std::unordered_map<std::string, std::size_t> pattern_of_key;
  std::vector<const Trip*> representatives;
  std::vector<std::size_t> trip_pattern;
  trip_pattern.reserve(trips.size());
  for (const Trip* trip : trips) {
    auto key = pattern_key(*trip, feed.stop_times_for(trip->trip_id));
    auto [it, inserted] = pattern_of_key.emplace(std::move(key), representatives.size());
    if (inserted) representatives.push_back(trip);
    trip_pattern.push_back(it->second);
  }

  std::vector<TripSegmentation> segmentations(representatives.size());
  parallel_for(representatives.size(), [&](std::size_t i) {
    segmentations[i] = segment_trip(feed, *representatives[i], options);
  });

  SegmentCatalog catalog;
  std::vector<std::vector<std::size_t>> pattern_segments(representatives.size());
  for (std::size_t p = 0; p < representatives.size(); ++p) {
    const TripSegmentation& seg = segmentations[p];
    for (std::size_t stop : seg.large_residual_stops) {
      table.diagnostics.add(diag::kSnapResidualTooLarge, "stop_times.txt",
                            "trip " + representatives[p]->trip_id + " stop " + seg.stop_ids[stop] +
                                " is " + std::to_string(seg.stop_positions[stop].offset_m) +
                                " m from its shape");
    }
    for (const auto& piece : seg.segments) {
      pattern_segments[p].push_back(catalog.intern(piece.stop_id1, piece.stop_id2, piece.path));
    }
  }

  using RowKey = std::tuple<std::size_t, std::string, int>;
  std::map<RowKey, std::uint64_t> traversals;
  for (std::size_t t = 0; t < trips.size(); ++t) {
    const Trip& trip = *trips[t];
    const std::size_t p = trip_pattern[t];
    if (segmentations[p].used_fallback_path) {
      table.diagnostics.add(diag::kTripWithoutShape, "trips.txt",
                            "trip " + trip.trip_id + " has no usable shape; using straight lines");
    }
    for (std::size_t d = 0; d < segmentations[p].degenerate_segments_dropped; ++d) {
      table.diagnostics.add(diag::kDegenerateSegment, "stop_times.txt",
                            "trip " + trip.trip_id + " repeats a stop with no movement");
    }
    const std::uint64_t departures = trip_departures(feed, trip);
    for (std::size_t index : pattern_segments[p]) {
      traversals[{index, trip.route_id, trip.direction_id}] += departures;
    }
  }

  // Order segments by id and remap row indices.
  std::vector<Segment> segments = std::move(catalog).release();
  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return segments[a].segment_id < segments[b].segment_id;
  });
  std::vector<std::size_t> new_index(segments.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    new_index[order[i]] = i;
    table.segments.push_back(std::move(segments[order[i]]));
  }

  for (const auto& [key, count] : traversals) {
    const auto& [old_index, route_id, direction_id] = key;
    const Segment& seg = table.segments[new_index[old_index]];
    table.rows.push_back(SegmentRow{new_index[old_index], seg.segment_id, seg.stop_id1, seg.stop_id2,
                                    route_id, direction_id, count, seg.spacing_m});
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const SegmentRow& a, const SegmentRow& b) {
    return std::tie(a.segment_id, a.route_id, a.direction_id) <
           std::tie(b.segment_id, b.route_id, b.direction_id);
  });
  return table;
}

SegmentTable extract_segments(const FeedBundle& feed, const SnapOptions& options) {
  return extract_segments(feed, busiest_day(feed).date, options);
}

}  // namespace stopspacing
