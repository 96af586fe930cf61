#include "stopspacing/signals.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>

#include "stopspacing/csv.hpp"
#include "stopspacing/error.hpp"

namespace stopspacing {

namespace {

constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::size_t> find_column(const csv::Table& table,
                                       std::initializer_list<std::string_view> names) {
  const auto& header = table.header();
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string h = lowercase(header[i]);
    for (auto n : names) {
      if (h == n) return i;
    }
  }
  return std::nullopt;
}

std::uint64_t cell_key(std::int64_t ix, std::int64_t iy) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
         static_cast<std::uint32_t>(iy);
}

}  // namespace

SignalSet make_signal_set(std::vector<GeoPoint> points, std::string source) {
  SignalSet set;
  set.source = std::move(source);
  std::set<std::pair<double, double>> seen;
  for (const auto& p : points) {
    if (!p.in_range()) {
      ++set.invalid_rows;
      continue;
    }
    if (!seen.emplace(p.lat, p.lon).second) {
      ++set.duplicates_removed;
      continue;
    }
    set.points.push_back(p);
  }
  return set;
}

SignalSet parse_signal_set(std::string_view text, std::string source) {
  csv::Table table(text);
  const auto lat_col = find_column(table, {"lat", "latitude"});
  const auto lon_col = find_column(table, {"lon", "lng", "longitude"});
  if (!lat_col || !lon_col) {
    throw Error(ErrorCode::malformed_input, "signal file needs lat and lon columns");
  }
  std::vector<GeoPoint> points;
  std::size_t invalid = 0;
  while (table.next()) {
    const auto lat = csv::parse_double(table.field(lat_col));
    const auto lon = csv::parse_double(table.field(lon_col));
    if (!lat || !lon) {
      ++invalid;
      continue;
    }
    points.push_back({*lat, *lon});
  }
  SignalSet set = make_signal_set(std::move(points), std::move(source));
  set.invalid_rows += invalid;
  return set;
}

SignalSet read_signal_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open signal file " + path.string());
  const std::string text(std::istreambuf_iterator<char>(in), {});
  return parse_signal_set(text, path.filename().string());
}

SignalGridIndex::SignalGridIndex(std::span<const GeoPoint> points, double cell_deg)
    : points_(points), cell_deg_(cell_deg), stamp_(points.size(), 0) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    cells_[cell_key(cell(points[i].lon), cell(points[i].lat))].push_back(i);
  }
}

std::int64_t SignalGridIndex::cell(double degrees) const {
  return static_cast<std::int64_t>(std::floor(degrees / cell_deg_));
}

void SignalGridIndex::query(const GeoBox& box, std::vector<std::size_t>& out) const {
  if (++generation_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    generation_ = 1;
  }
  for (std::int64_t ix = cell(box.min_lon); ix <= cell(box.max_lon); ++ix) {
    for (std::int64_t iy = cell(box.min_lat); iy <= cell(box.max_lat); ++iy) {
      auto it = cells_.find(cell_key(ix, iy));
      if (it == cells_.end()) continue;
      for (std::size_t i : it->second) {
        if (stamp_[i] == generation_) continue;
        const GeoPoint& p = points_[i];
        if (p.lat < box.min_lat || p.lat > box.max_lat || p.lon < box.min_lon || p.lon > box.max_lon) {
          continue;
        }
        stamp_[i] = generation_;
        out.push_back(i);
      }
    }
  }
}

SignalCountTable signals_per_segment(const SegmentTable& table, const SignalSet& signals,
                                     double buffer_m) {
  if (!(buffer_m > 0.0)) throw Error(ErrorCode::invalid_argument, "buffer must be positive");
  SignalCountTable out;
  out.buffer_m = buffer_m;
  out.feed_id = table.feed_id;
  const auto route_w = segment_weights(table, WeightingScheme::route);
  const auto trav_w = segment_weights(table, WeightingScheme::traversal);

  const SignalGridIndex index(signals.points);
  // Lat padding is exact in the local plane; lon padding uses the smallest
  // cosine inside the padded box. 1% slack on top.
  const double pad_lat = 1.01 * buffer_m / kMetersPerDegree;
  std::vector<std::size_t> candidates;
  for (std::size_t s = 0; s < table.segments.size(); ++s) {
    const Segment& seg = table.segments[s];
    const auto points = seg.path.points();
    candidates.clear();
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
      GeoBox box{std::min(points[i].lat, points[i + 1].lat) - pad_lat,
                 std::min(points[i].lon, points[i + 1].lon),
                 std::max(points[i].lat, points[i + 1].lat) + pad_lat,
                 std::max(points[i].lon, points[i + 1].lon)};
      const double max_abs_lat = std::min(89.9, std::max(std::abs(box.min_lat), std::abs(box.max_lat)));
      const double pad_lon = pad_lat / std::cos(max_abs_lat * std::numbers::pi / 180.0);
      box.min_lon -= pad_lon;
      box.max_lon += pad_lon;
      index.query(box, candidates);
    }
    std::uint32_t count = 0;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (std::size_t c : candidates) {
      if (point_to_path_distance(seg.path, signals.points[c]) <= buffer_m) ++count;
    }
    out.counts.push_back(SegmentSignalCount{s, seg.segment_id, seg.stop_id1, seg.stop_id2, count,
                                            route_w[s], trav_w[s]});
  }
  return out;
}

double GeometricFit::pmf_at(std::uint32_t k) const {
  if (p_hat >= 1.0) return k == 0 ? 1.0 : 0.0;
  return p_hat * std::pow(1.0 - p_hat, static_cast<double>(k));
}

std::vector<double> signal_count_weights(const SignalCountTable& counts, WeightingScheme scheme,
                                         const LoadMap* loads) {
  if (scheme == WeightingScheme::load && loads == nullptr) {
    throw Error(ErrorCode::load_map_missing, "load weighting requires a load file");
  }
  std::vector<double> w;
  w.reserve(counts.counts.size());
  for (const auto& c : counts.counts) {
    switch (scheme) {
      case WeightingScheme::segment: w.push_back(1.0); break;
      case WeightingScheme::route: w.push_back(c.route_weight); break;
      case WeightingScheme::traversal: w.push_back(c.traversal_weight); break;
      case WeightingScheme::load: w.push_back(loads->find(c.stop_id1, c.stop_id2).value_or(0.0)); break;
    }
  }
  return w;
}

GeometricFit fit_geometric_mle(const SignalCountTable& counts, WeightingScheme scheme,
                               const LoadMap* loads) {
  if (counts.counts.empty()) throw Error(ErrorCode::empty_table, "no segments to fit");
  const auto weights = signal_count_weights(counts, scheme, loads);
  GeometricFit fit;
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    weighted += weights[i] * counts.counts[i].signal_count;
    fit.max_count = std::max(fit.max_count, counts.counts[i].signal_count);
  }
  if (!(total > 0.0)) throw Error(ErrorCode::zero_total_weight, "total weight is zero");
  fit.weighted_mean_count = weighted / total;
  fit.p_hat = 1.0 / (1.0 + fit.weighted_mean_count);
  fit.observed_share.assign(fit.max_count + 1, 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    fit.observed_share[counts.counts[i].signal_count] += weights[i] / total;
  }
  for (std::uint32_t k = 0; k <= fit.max_count; ++k) fit.pmf.push_back(fit.pmf_at(k));
  return fit;
}

double geometric_log_likelihood(const SignalCountTable& counts, std::span<const double> weights,
                                double p) {
  double ll = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double k = counts.counts[i].signal_count;
    ll += weights[i] * std::log(p);
    if (k > 0.0) ll += weights[i] * k * std::log1p(-p);
  }
  return ll;
}

}  // namespace stopspacing
