#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "stopspacing/signals.hpp"
#include "stopspacing/stats.hpp"

namespace stopspacing {

enum class SegmentFormat { delimited, geojson };

// Fixed-point text with `decimals` places; never prints "-0".
std::string format_fixed(double value, int decimals);

// segment_id,stop_id1,stop_id2,route_id,direction_id,traversals,distance,geometry
// with distance in meters to 2 places and geometry as a quoted WKT
// LINESTRING in lon lat order to 6 places. Throws Error(empty_table).
std::string segments_to_delimited(const SegmentTable& table);

// RFC 7946 FeatureCollection, one LineString feature per row, the other
// columns as properties. Throws Error(empty_table).
std::string segments_to_geojson(const SegmentTable& table);

// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, std::string_view content);

// Refuses an empty table before touching the filesystem.
void export_segments(const SegmentTable& table, SegmentFormat format,
                     const std::filesystem::path& path);

std::string ecdf_to_delimited(const Ecdf& ecdf);
std::string histogram_to_delimited(std::span<const HistogramBin> bins);
std::string kde_to_delimited(std::span<const DensityPoint> density);
std::string signal_counts_to_delimited(const SignalCountTable& counts);
std::string geometric_fit_to_delimited(const GeometricFit& fit);

// Human-readable key: value report, including how the busiest day was chosen.
std::string summary_to_text(const SpacingSummary& summary);

inline constexpr std::string_view kBusiestDayBasis = "trip departures (frequency-expanded)";

}  // namespace stopspacing
