#include "stopspacing/export.hpp"

#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "stopspacing/csv.hpp"
#include "stopspacing/error.hpp"

namespace stopspacing {

namespace {

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::string wkt_linestring(const Path& path) {
  std::string out = "LINESTRING (";
  bool first = true;
  for (const auto& p : path.points()) {
    if (!first) out += ", ";
    first = false;
    out += format_fixed(p.lon, 6);
    out += ' ';
    out += format_fixed(p.lat, 6);
  }
  out += ')';
  return out;
}

std::string general(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 10);
  if (ec != std::errc{}) throw Error(ErrorCode::invalid_argument, "unformattable number");
  return std::string(buf.data(), end);
}

void require_rows(const SegmentTable& table) {
  if (table.empty()) throw Error(ErrorCode::empty_table, "segment table is empty; nothing to export");
}

}  // namespace

std::string format_fixed(double value, int decimals) {
  if (!std::isfinite(value)) {
    if (std::isnan(value)) return "nan";
    return value > 0 ? "inf" : "-inf";
  }
  std::array<char, 352> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw Error(ErrorCode::invalid_argument, "unformattable number");
  std::string out(buf.data(), end);
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

std::string segments_to_delimited(const SegmentTable& table) {
  require_rows(table);
  std::string out = "segment_id,stop_id1,stop_id2,route_id,direction_id,traversals,distance,geometry\n";
  for (const auto& row : table.rows) {
    out += csv::escape(row.segment_id);
    out += ',';
    out += csv::escape(row.stop_id1);
    out += ',';
    out += csv::escape(row.stop_id2);
    out += ',';
    out += csv::escape(row.route_id);
    out += ',';
    out += std::to_string(row.direction_id);
    out += ',';
    out += std::to_string(row.traversals);
    out += ',';
    out += format_fixed(row.distance_m, 2);
    out += ",\"";
    out += wkt_linestring(table.segment(row).path);
    out += "\"\n";
  }
  return out;
}

std::string segments_to_geojson(const SegmentTable& table) {
  require_rows(table);
  std::string out = "{\"type\":\"FeatureCollection\",\"features\":[\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    out += "{\"type\":\"Feature\",\"properties\":{";
    out += "\"segment_id\":" + json_string(row.segment_id);
    out += ",\"stop_id1\":" + json_string(row.stop_id1);
    out += ",\"stop_id2\":" + json_string(row.stop_id2);
    out += ",\"route_id\":" + json_string(row.route_id);
    out += ",\"direction_id\":" + std::to_string(row.direction_id);
    out += ",\"traversals\":" + std::to_string(row.traversals);
    out += ",\"distance\":" + format_fixed(row.distance_m, 2);
    out += "},\"geometry\":{\"type\":\"LineString\",\"coordinates\":[";
    bool first = true;
    for (const auto& p : table.segment(row).path.points()) {
      if (!first) out += ',';
      first = false;
      out += '[' + format_fixed(p.lon, 6) + ',' + format_fixed(p.lat, 6) + ']';
    }
    out += "]}}";
    if (i + 1 < table.rows.size()) out += ',';
    out += '\n';
  }
  out += "]}\n";
  return out;
}

void write_file_atomically(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const auto temp = dir / ("." + path.filename().string() + ".tmp." +
                           std::to_string(std::random_device{}()) + "." + std::to_string(counter++));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + temp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(temp, ec);
      throw Error(ErrorCode::io, "failed writing " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw Error(ErrorCode::io, "cannot replace " + path.string() + ": " + ec.message());
  }
}

void export_segments(const SegmentTable& table, SegmentFormat format,
                     const std::filesystem::path& path) {
  require_rows(table);
  write_file_atomically(path, format == SegmentFormat::delimited ? segments_to_delimited(table)
                                                                 : segments_to_geojson(table));
}

std::string ecdf_to_delimited(const Ecdf& ecdf) {
  std::string out = "spacing_m,cumulative_share\n";
  for (const auto& s : ecdf.steps()) {
    out += format_fixed(s.spacing_m, 2) + ',' + format_fixed(s.cumulative, 6) + '\n';
  }
  return out;
}

std::string histogram_to_delimited(std::span<const HistogramBin> bins) {
  std::string out = "bin_start_m,bin_end_m,weight_share\n";
  for (const auto& b : bins) {
    out += format_fixed(b.bin_start_m, 2) + ',' + format_fixed(b.bin_end_m, 2) + ',' +
           format_fixed(b.weight_share, 6) + '\n';
  }
  return out;
}

std::string kde_to_delimited(std::span<const DensityPoint> density) {
  std::string out = "spacing_m,density\n";
  for (const auto& d : density) {
    out += format_fixed(d.spacing_m, 2) + ',' + general(d.density) + '\n';
  }
  return out;
}

std::string signal_counts_to_delimited(const SignalCountTable& counts) {
  std::string out = "segment_id,stop_id1,stop_id2,signal_count,route_weight,traversal_weight\n";
  for (const auto& c : counts.counts) {
    out += csv::escape(c.segment_id) + ',' + csv::escape(c.stop_id1) + ',' + csv::escape(c.stop_id2) +
           ',' + std::to_string(c.signal_count) + ',' + general(c.route_weight) + ',' +
           general(c.traversal_weight) + '\n';
  }
  return out;
}

std::string geometric_fit_to_delimited(const GeometricFit& fit) {
  std::string out = "k,observed_share,geometric_pmf\n";
  for (std::uint32_t k = 0; k <= fit.max_count; ++k) {
    out += std::to_string(k) + ',' + format_fixed(fit.observed_share[k], 6) + ',' +
           format_fixed(fit.pmf[k], 6) + '\n';
  }
  return out;
}

std::string summary_to_text(const SpacingSummary& s) {
  std::ostringstream os;
  const auto meters = [](double v) { return format_fixed(v, 3) + " m"; };
  const auto share = [](double v) { return format_fixed(v, 6); };
  os << "feed: " << s.feed_id << '\n';
  os << "busiest_day: " << s.busiest_day.iso() << '\n';
  os << "busiest_day_basis: " << kBusiestDayBasis << '\n';
  os << "threshold_m: " << (std::isinf(s.threshold_m) ? std::string("none") : format_fixed(s.threshold_m, 2))
     << '\n';
  os << "segment_weighted_mean: " << meters(s.segment_weighted_mean_m) << '\n';
  os << "route_weighted_mean: " << meters(s.route_weighted_mean_m) << '\n';
  os << "traversal_weighted_mean: " << meters(s.traversal_weighted_mean_m) << '\n';
  if (s.load_weighted_mean_m) os << "load_weighted_mean: " << meters(*s.load_weighted_mean_m) << '\n';
  os << "n_routes: " << s.n_routes << '\n';
  os << "n_segments: " << s.n_segments << '\n';
  os << "n_rows: " << s.n_rows << '\n';
  os << "n_traversals: " << s.n_traversals << '\n';
  os << "total_service_km: " << format_fixed(s.total_service_km, 3) << '\n';
  os << "excluded_share_segment: " << share(s.excluded_share_segment) << '\n';
  os << "excluded_share_route: " << share(s.excluded_share_route) << '\n';
  os << "excluded_share_traversal: " << share(s.excluded_share_traversal) << '\n';
  if (s.excluded_share_load) os << "excluded_share_load: " << share(*s.excluded_share_load) << '\n';
  if (s.missing_load_segments > 0) os << "missing_load_segments: " << s.missing_load_segments << '\n';
  return os.str();
}

}  // namespace stopspacing
