#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stopspacing/segmenter.hpp"
#include "stopspacing/service_date.hpp"

namespace stopspacing {

enum class WeightingScheme { segment, route, traversal, load };

std::string_view scheme_name(WeightingScheme scheme);
std::optional<WeightingScheme> parse_scheme(std::string_view name);

inline constexpr double kDefaultThresholdM = 3000.0;
inline constexpr double kNoThreshold = std::numeric_limits<double>::infinity();

// Average passengers aboard per (stop_id1, stop_id2).
class LoadMap {
 public:
  void set(std::string stop_id1, std::string stop_id2, double load);
  std::optional<double> find(const std::string& stop_id1, const std::string& stop_id2) const;
  std::size_t size() const { return loads_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, double> loads_;
};

// Reads "stop_id1,stop_id2,avg_load". Throws Error(malformed_input) on a
// missing column or a negative or unparseable load.
LoadMap read_load_map(const std::filesystem::path& path);
LoadMap parse_load_map(std::string_view text);

struct WeightedSpacing {
  double spacing_m;
  double weight;
};

struct WeightedSpacings {
  std::vector<WeightedSpacing> entries;  // spacing_m <= threshold_m for all
  WeightingScheme scheme = WeightingScheme::segment;
  double threshold_m = kDefaultThresholdM;
  double excluded_share = 0.0;           // weight share removed by the threshold
  std::size_t excluded_count = 0;
  std::size_t missing_load_segments = 0;  // load scheme: segments with no load data

  double total_weight() const;
};

// Weight of every segment in table.segments under `scheme`:
//   segment   1
//   route     distinct route_ids among the segment's rows
//   traversal sum of the segment's traversals
//   load      LoadMap value for (stop_id1, stop_id2), 0 when absent
// Throws Error(load_map_missing) for the load scheme without loads.
std::vector<double> segment_weights(const SegmentTable& table, WeightingScheme scheme,
                                    const LoadMap* loads = nullptr,
                                    std::size_t* missing_loads = nullptr);

// Drops spacings above threshold_m and records their weight share. Throws
// Error(all_excluded) when nothing remains, Error(invalid_argument) for a
// non-positive threshold or a negative weight.
WeightedSpacings apply_threshold(std::vector<WeightedSpacing> raw, WeightingScheme scheme,
                                 double threshold_m);

// Per-segment (spacing, weight) pairs for a segment table. Throws
// Error(empty_table) for an empty table.
WeightedSpacings build_weights(const SegmentTable& table, WeightingScheme scheme,
                               double threshold_m = kDefaultThresholdM,
                               const LoadMap* loads = nullptr);

// sum(w_i s_i) / sum(w_i). Throws Error(zero_total_weight).
double weighted_mean(const WeightedSpacings& ws);

// Right-continuous weighted step function F(s) = sum(w_i [s_i <= s]) / sum(w_i).
class Ecdf {
 public:
  struct Step {
    double spacing_m;
    double cumulative;
  };

  explicit Ecdf(std::vector<Step> steps) : steps_(std::move(steps)) {}

  std::span<const Step> steps() const { return steps_; }
  double operator()(double s) const;

 private:
  std::vector<Step> steps_;
};

// Throws Error(zero_total_weight).
Ecdf weighted_ecdf(const WeightedSpacings& ws);

struct HistogramBin {
  double bin_start_m;
  double bin_end_m;
  double weight_share;
};

// Bins of width bin_width_m covering [0, threshold] (or [0, max spacing]
// without a threshold). A spacing equal to the upper edge falls in the last
// bin.
std::vector<HistogramBin> histogram(const WeightedSpacings& ws, double bin_width_m);

struct DensityPoint {
  double spacing_m;
  double density;
};

// Gaussian kernel width from Silverman's rule with the weighted standard
// deviation and the effective sample size (sum w)^2 / sum w^2:
//   h = sigma_w * (3 n_eff / 4)^(-1/5).
// Throws Error(degenerate_data) when all spacings are equal.
double silverman_bandwidth(const WeightedSpacings& ws);

// `points` evenly spaced values from min - 4h to max + 4h.
std::vector<double> kde_grid(const WeightedSpacings& ws, std::size_t points = 512);

// Weighted Gaussian kernel density on `grid`. Throws Error(degenerate_data)
// when all spacings are equal.
std::vector<DensityPoint> kde(const WeightedSpacings& ws, std::span<const double> grid);

struct SchemeResult {
  double mean_m;
  double excluded_share;
};

struct SpacingSummary {
  std::string feed_id;
  double segment_weighted_mean_m = 0.0;
  double route_weighted_mean_m = 0.0;
  double traversal_weighted_mean_m = 0.0;
  std::optional<double> load_weighted_mean_m;
  std::size_t n_routes = 0;
  std::size_t n_segments = 0;  // unique segments
  std::size_t n_rows = 0;      // (segment, route, direction) rows
  std::uint64_t n_traversals = 0;
  double total_service_km = 0.0;  // threshold not applied
  ServiceDate busiest_day;
  double threshold_m = kDefaultThresholdM;
  double excluded_share_segment = 0.0;
  double excluded_share_route = 0.0;
  double excluded_share_traversal = 0.0;
  std::optional<double> excluded_share_load;
  std::size_t missing_load_segments = 0;
};

SpacingSummary summarize(const SegmentTable& table, double threshold_m = kDefaultThresholdM,
                         const LoadMap* loads = nullptr);

}  // namespace stopspacing
