#include "stopspacing/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>

#include "stopspacing/csv.hpp"
#include "stopspacing/error.hpp"

namespace stopspacing {

std::string_view scheme_name(WeightingScheme scheme) {
  switch (scheme) {
    case WeightingScheme::segment: return "segment";
    case WeightingScheme::route: return "route";
    case WeightingScheme::traversal: return "traversal";
    case WeightingScheme::load: return "load";
  }
  return "segment";
}

std::optional<WeightingScheme> parse_scheme(std::string_view name) {
  for (auto s : {WeightingScheme::segment, WeightingScheme::route, WeightingScheme::traversal,
                 WeightingScheme::load}) {
    if (scheme_name(s) == name) return s;
  }
  return std::nullopt;
}

void LoadMap::set(std::string stop_id1, std::string stop_id2, double load) {
  loads_[{std::move(stop_id1), std::move(stop_id2)}] = load;
}

std::optional<double> LoadMap::find(const std::string& stop_id1, const std::string& stop_id2) const {
  auto it = loads_.find({stop_id1, stop_id2});
  if (it == loads_.end()) return std::nullopt;
  return it->second;
}

LoadMap parse_load_map(std::string_view text) {
  csv::Table table(text);
  const auto c1 = table.column("stop_id1");
  const auto c2 = table.column("stop_id2");
  const auto cl = table.column("avg_load");
  if (!c1 || !c2 || !cl) {
    throw Error(ErrorCode::malformed_input, "load file needs columns stop_id1,stop_id2,avg_load");
  }
  LoadMap map;
  while (table.next()) {
    const auto load = csv::parse_double(table.field(cl));
    if (!load || *load < 0.0 || table.field(c1).empty() || table.field(c2).empty()) {
      throw Error(ErrorCode::malformed_input,
                  "invalid load row at line " + std::to_string(table.line()));
    }
    map.set(std::string(table.field(c1)), std::string(table.field(c2)), *load);
  }
  return map;
}

LoadMap read_load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open load file " + path.string());
  const std::string text(std::istreambuf_iterator<char>(in), {});
  return parse_load_map(text);
}

double WeightedSpacings::total_weight() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.weight;
  return total;
}

std::vector<double> segment_weights(const SegmentTable& table, WeightingScheme scheme,
                                    const LoadMap* loads, std::size_t* missing_loads) {
  if (scheme == WeightingScheme::load && loads == nullptr) {
    throw Error(ErrorCode::load_map_missing, "load weighting requires a load file");
  }
  std::vector<double> weights(table.segments.size(), 0.0);
  std::size_t missing = 0;
  switch (scheme) {
    case WeightingScheme::segment:
      std::fill(weights.begin(), weights.end(), 1.0);
      break;
    case WeightingScheme::route: {
      std::vector<std::set<std::string>> routes(table.segments.size());
      for (const auto& row : table.rows) routes[row.segment_index].insert(row.route_id);
      for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = static_cast<double>(routes[i].size());
      break;
    }
    case WeightingScheme::traversal:
      for (const auto& row : table.rows) weights[row.segment_index] += static_cast<double>(row.traversals);
      break;
    case WeightingScheme::load:
      for (std::size_t i = 0; i < weights.size(); ++i) {
        const auto& seg = table.segments[i];
        if (auto load = loads->find(seg.stop_id1, seg.stop_id2)) {
          weights[i] = *load;
        } else {
          ++missing;
        }
      }
      break;
  }
  if (missing_loads != nullptr) *missing_loads = missing;
  return weights;
}

WeightedSpacings apply_threshold(std::vector<WeightedSpacing> raw, WeightingScheme scheme,
                                 double threshold_m) {
  if (!(threshold_m > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "threshold must be positive");
  }
  WeightedSpacings ws;
  ws.scheme = scheme;
  ws.threshold_m = threshold_m;
  double total = 0.0;
  double excluded = 0.0;
  for (const auto& e : raw) {
    if (!(e.weight >= 0.0) || !(e.spacing_m >= 0.0)) {
      throw Error(ErrorCode::invalid_argument, "weights and spacings must be non-negative");
    }
    total += e.weight;
    if (e.spacing_m > threshold_m) {
      excluded += e.weight;
      ++ws.excluded_count;
      continue;
    }
    ws.entries.push_back(e);
  }
  if (ws.entries.empty()) {
    throw Error(ErrorCode::all_excluded, "threshold excludes every segment");
  }
  ws.excluded_share = total > 0.0 ? excluded / total : 0.0;
  return ws;
}

WeightedSpacings build_weights(const SegmentTable& table, WeightingScheme scheme,
                               double threshold_m, const LoadMap* loads) {
  if (table.empty()) throw Error(ErrorCode::empty_table, "segment table is empty");
  std::size_t missing = 0;
  const std::vector<double> weights = segment_weights(table, scheme, loads, &missing);
  std::vector<WeightedSpacing> raw;
  raw.reserve(table.segments.size());
  for (std::size_t i = 0; i < table.segments.size(); ++i) {
    raw.push_back({table.segments[i].spacing_m, weights[i]});
  }
  WeightedSpacings ws = apply_threshold(std::move(raw), scheme, threshold_m);
  ws.missing_load_segments = missing;
  return ws;
}

double weighted_mean(const WeightedSpacings& ws) {
  double sum_w = 0.0;
  double sum_ws = 0.0;
  for (const auto& e : ws.entries) {
    sum_w += e.weight;
    sum_ws += e.weight * e.spacing_m;
  }
  if (!(sum_w > 0.0)) throw Error(ErrorCode::zero_total_weight, "total weight is zero");
  return sum_ws / sum_w;
}

double Ecdf::operator()(double s) const {
  auto it = std::upper_bound(steps_.begin(), steps_.end(), s,
                             [](double v, const Step& step) { return v < step.spacing_m; });
  if (it == steps_.begin()) return 0.0;
  return std::prev(it)->cumulative;
}

Ecdf weighted_ecdf(const WeightedSpacings& ws) {
  std::vector<WeightedSpacing> sorted = ws.entries;
  std::sort(sorted.begin(), sorted.end(),
            [](const WeightedSpacing& a, const WeightedSpacing& b) { return a.spacing_m < b.spacing_m; });
  // Cumulative weight at each distinct spacing; the last value is the total,
  // so the final step is exactly 1.
  std::vector<std::pair<double, double>> cumulative;
  double running = 0.0;
  for (const auto& e : sorted) {
    running += e.weight;
    if (!cumulative.empty() && cumulative.back().first == e.spacing_m) {
      cumulative.back().second = running;
    } else {
      cumulative.emplace_back(e.spacing_m, running);
    }
  }
  if (!(running > 0.0)) throw Error(ErrorCode::zero_total_weight, "total weight is zero");
  std::vector<Ecdf::Step> steps;
  steps.reserve(cumulative.size());
  for (const auto& [s, c] : cumulative) steps.push_back({s, c / running});
  return Ecdf(std::move(steps));
}

std::vector<HistogramBin> histogram(const WeightedSpacings& ws, double bin_width_m) {
  if (!(bin_width_m > 0.0)) throw Error(ErrorCode::invalid_argument, "bin width must be positive");
  double upper = ws.threshold_m;
  if (!std::isfinite(upper)) {
    upper = 0.0;
    for (const auto& e : ws.entries) upper = std::max(upper, e.spacing_m);
  }
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(upper / bin_width_m)));
  std::vector<double> mass(n, 0.0);
  double total = 0.0;
  for (const auto& e : ws.entries) {
    const auto bin = std::min(n - 1, static_cast<std::size_t>(std::floor(e.spacing_m / bin_width_m)));
    mass[bin] += e.weight;
    total += e.weight;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::zero_total_weight, "total weight is zero");
  std::vector<HistogramBin> bins;
  bins.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    bins.push_back({static_cast<double>(i) * bin_width_m, static_cast<double>(i + 1) * bin_width_m,
                    mass[i] / total});
  }
  return bins;
}

namespace {

struct WeightedMoments {
  double total;
  double mean;
  double variance;
  double effective_n;
  double min;
  double max;
};

WeightedMoments moments(const WeightedSpacings& ws) {
  WeightedMoments m{0.0, 0.0, 0.0, 0.0, std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
  double sum_sq_w = 0.0;
  for (const auto& e : ws.entries) {
    if (e.weight <= 0.0) continue;
    m.total += e.weight;
    m.mean += e.weight * e.spacing_m;
    sum_sq_w += e.weight * e.weight;
    m.min = std::min(m.min, e.spacing_m);
    m.max = std::max(m.max, e.spacing_m);
  }
  if (!(m.total > 0.0)) throw Error(ErrorCode::zero_total_weight, "total weight is zero");
  m.mean /= m.total;
  for (const auto& e : ws.entries) {
    if (e.weight <= 0.0) continue;
    const double d = e.spacing_m - m.mean;
    m.variance += e.weight * d * d;
  }
  m.variance /= m.total;
  m.effective_n = m.total * m.total / sum_sq_w;
  return m;
}

}  // namespace

double silverman_bandwidth(const WeightedSpacings& ws) {
  const WeightedMoments m = moments(ws);
  if (!(m.max > m.min) || !(m.variance > 0.0)) {
    throw Error(ErrorCode::degenerate_data, "all spacings are equal; density undefined");
  }
  return std::sqrt(m.variance) * std::pow(0.75 * m.effective_n, -0.2);
}

std::vector<double> kde_grid(const WeightedSpacings& ws, std::size_t points) {
  const double h = silverman_bandwidth(ws);
  const WeightedMoments m = moments(ws);
  points = std::max<std::size_t>(points, 2);
  const double lo = m.min - 4.0 * h;
  const double hi = m.max + 4.0 * h;
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

std::vector<DensityPoint> kde(const WeightedSpacings& ws, std::span<const double> grid) {
  const double h = silverman_bandwidth(ws);
  const double total = ws.total_weight();
  const double norm = 1.0 / (total * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<DensityPoint> out;
  out.reserve(grid.size());
  for (double s : grid) {
    double acc = 0.0;
    for (const auto& e : ws.entries) {
      const double z = (s - e.spacing_m) / h;
      acc += e.weight * std::exp(-0.5 * z * z);
    }
    out.push_back({s, acc * norm});
  }
  return out;
}

SpacingSummary summarize(const SegmentTable& table, double threshold_m, const LoadMap* loads) {
  if (table.empty()) throw Error(ErrorCode::empty_table, "segment table is empty");
  SpacingSummary s;
  s.feed_id = table.feed_id;
  s.threshold_m = threshold_m;
  s.busiest_day = table.measurement_date;

  const auto seg = build_weights(table, WeightingScheme::segment, threshold_m);
  const auto route = build_weights(table, WeightingScheme::route, threshold_m);
  const auto trav = build_weights(table, WeightingScheme::traversal, threshold_m);
  s.segment_weighted_mean_m = weighted_mean(seg);
  s.route_weighted_mean_m = weighted_mean(route);
  s.traversal_weighted_mean_m = weighted_mean(trav);
  s.excluded_share_segment = seg.excluded_share;
  s.excluded_share_route = route.excluded_share;
  s.excluded_share_traversal = trav.excluded_share;
  if (loads != nullptr) {
    const auto load = build_weights(table, WeightingScheme::load, threshold_m, loads);
    s.load_weighted_mean_m = weighted_mean(load);
    s.excluded_share_load = load.excluded_share;
    s.missing_load_segments = load.missing_load_segments;
  }

  std::set<std::string> routes;
  double service_m = 0.0;
  for (const auto& row : table.rows) {
    routes.insert(row.route_id);
    s.n_traversals += row.traversals;
    service_m += static_cast<double>(row.traversals) * row.distance_m;
  }
  s.n_routes = routes.size();
  s.n_segments = table.segments.size();
  s.n_rows = table.rows.size();
  s.total_service_km = service_m / 1000.0;
  return s;
}

}  // namespace stopspacing
