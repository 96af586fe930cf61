#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stopspacing/geometry.hpp"
#include "stopspacing/segmenter.hpp"
#include "stopspacing/stats.hpp"

namespace stopspacing {

inline constexpr double kDefaultSignalBufferM = 5.5;

// Traffic signal locations with exact-duplicate coordinates removed.
struct SignalSet {
  std::vector<GeoPoint> points;
  std::string source;
  std::size_t duplicates_removed = 0;
  std::size_t invalid_rows = 0;
};

SignalSet make_signal_set(std::vector<GeoPoint> points, std::string source);

// Delimited text with lat and lon columns (latitude/longitude accepted,
// case-insensitive). Rows with missing or out-of-range coordinates are
// skipped and counted. Throws Error(malformed_input) when the columns are
// missing.
SignalSet read_signal_set(const std::filesystem::path& path);
SignalSet parse_signal_set(std::string_view text, std::string source);

// Uniform lat/lon grid over signal points for box queries.
class SignalGridIndex {
 public:
  SignalGridIndex(std::span<const GeoPoint> points, double cell_deg = 0.001);

  // Indices of points inside the box, each reported once per call.
  void query(const GeoBox& box, std::vector<std::size_t>& out) const;

 private:
  std::int64_t cell(double degrees) const;

  std::span<const GeoPoint> points_;
  double cell_deg_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
  mutable std::vector<std::uint32_t> stamp_;
  mutable std::uint32_t generation_ = 0;
};

struct SegmentSignalCount {
  std::size_t segment_index;
  std::string segment_id;
  std::string stop_id1;
  std::string stop_id2;
  std::uint32_t signal_count;
  double route_weight;
  double traversal_weight;
};

// Signals per unique segment, with the route and traversal weights of each
// segment carried along for the fit.
struct SignalCountTable {
  std::vector<SegmentSignalCount> counts;  // same order as SegmentTable::segments
  double buffer_m = kDefaultSignalBufferM;
  std::string feed_id;
};

// Counts signals within buffer_m of each segment path (point_to_path_distance
// <= buffer_m). A signal near several segments counts for each of them.
SignalCountTable signals_per_segment(const SegmentTable& table, const SignalSet& signals,
                                     double buffer_m = kDefaultSignalBufferM);

// Geometric distribution on {0, 1, 2, ...} with pmf p (1 - p)^k.
struct GeometricFit {
  double p_hat = 1.0;
  double weighted_mean_count = 0.0;
  std::uint32_t max_count = 0;
  std::vector<double> observed_share;  // k = 0..max_count
  std::vector<double> pmf;             // k = 0..max_count

  double pmf_at(std::uint32_t k) const;
};

std::vector<double> signal_count_weights(const SignalCountTable& counts, WeightingScheme scheme,
                                         const LoadMap* loads = nullptr);

// Closed-form weighted MLE: p = 1 / (1 + weighted mean count).
GeometricFit fit_geometric_mle(const SignalCountTable& counts, WeightingScheme scheme,
                               const LoadMap* loads = nullptr);

// sum_i w_i (log p + k_i log(1 - p)).
double geometric_log_likelihood(const SignalCountTable& counts, std::span<const double> weights,
                                double p);

}  // namespace stopspacing
