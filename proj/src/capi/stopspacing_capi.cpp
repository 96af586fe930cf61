#include "stopspacing/stopspacing.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "stopspacing/calendar.hpp"
#include "stopspacing/error.hpp"
#include "stopspacing/export.hpp"
#include "stopspacing/feed.hpp"
#include "stopspacing/ingest.hpp"
#include "stopspacing/segmenter.hpp"
#include "stopspacing/signals.hpp"
#include "stopspacing/stats.hpp"

using namespace stopspacing;

struct ss_feed {
  FeedBundle feed;
};

struct ss_segments {
  SegmentTable table;
};

struct ss_loads {
  LoadMap loads;
};

struct ss_series {
  std::vector<std::string> columns;
  std::vector<double> values;  // row-major
  std::string text;
};

struct ss_signals {
  SignalSet set;
};

struct ss_signal_counts {
  SignalCountTable counts;
};

struct ss_catalog {
  std::vector<ingest::CatalogEntry> entries;
};

namespace {

thread_local std::string last_error;
thread_local long last_http_status = 0;

ss_status status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return SS_ERR_INVALID_ARGUMENT;
    case ErrorCode::io: return SS_ERR_IO;
    case ErrorCode::missing_required_file: return SS_ERR_MISSING_REQUIRED_FILE;
    case ErrorCode::malformed_row: return SS_ERR_MALFORMED_ROW;
    case ErrorCode::no_service_info: return SS_ERR_NO_SERVICE_INFO;
    case ErrorCode::invalid_range: return SS_ERR_INVALID_RANGE;
    case ErrorCode::load_map_missing: return SS_ERR_LOAD_MAP_MISSING;
    case ErrorCode::all_excluded: return SS_ERR_ALL_EXCLUDED;
    case ErrorCode::zero_total_weight: return SS_ERR_ZERO_TOTAL_WEIGHT;
    case ErrorCode::degenerate_data: return SS_ERR_DEGENERATE_DATA;
    case ErrorCode::empty_table: return SS_ERR_EMPTY_TABLE;
    case ErrorCode::network_unavailable: return SS_ERR_NETWORK_UNAVAILABLE;
    case ErrorCode::http_error: return SS_ERR_HTTP;
    case ErrorCode::not_a_zip: return SS_ERR_NOT_A_ZIP;
    case ErrorCode::malformed_catalog: return SS_ERR_MALFORMED_CATALOG;
    case ErrorCode::malformed_input: return SS_ERR_MALFORMED_INPUT;
  }
  return SS_ERR_INTERNAL;
}

ss_status fail(ss_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

// Runs `body` and converts any exception into a status plus last_error.
template <typename F>
ss_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return SS_OK;
  } catch (const HttpError& e) {
    last_http_status = e.status();
    return fail(SS_ERR_HTTP, e.what());
  } catch (const Error& e) {
    return fail(status_for(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SS_ERR_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void require(bool condition, const char* what) {
  if (!condition) throw Error(ErrorCode::invalid_argument, what);
}

WeightingScheme to_scheme(ss_scheme scheme) {
  switch (scheme) {
    case SS_SCHEME_SEGMENT: return WeightingScheme::segment;
    case SS_SCHEME_ROUTE: return WeightingScheme::route;
    case SS_SCHEME_TRAVERSAL: return WeightingScheme::traversal;
    case SS_SCHEME_LOAD: return WeightingScheme::load;
  }
  throw Error(ErrorCode::invalid_argument, "unknown weighting scheme");
}

const LoadMap* loads_of(const ss_loads* loads) { return loads != nullptr ? &loads->loads : nullptr; }

ss_series* make_series(std::vector<std::string> columns, std::string text) {
  auto* s = new ss_series;
  s->columns = std::move(columns);
  s->text = std::move(text);
  return s;
}

}  // namespace

extern "C" {

const char* ss_version(void) { return "0.1.0"; }

const char* ss_status_name(ss_status status) {
  switch (status) {
    case SS_OK: return "OK";
    case SS_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case SS_ERR_IO: return "IoError";
    case SS_ERR_MISSING_REQUIRED_FILE: return "MissingRequiredFile";
    case SS_ERR_MALFORMED_ROW: return "MalformedRow";
    case SS_ERR_NO_SERVICE_INFO: return "NoServiceInfo";
    case SS_ERR_INVALID_RANGE: return "InvalidRange";
    case SS_ERR_LOAD_MAP_MISSING: return "LoadMapMissing";
    case SS_ERR_ALL_EXCLUDED: return "AllExcluded";
    case SS_ERR_ZERO_TOTAL_WEIGHT: return "ZeroTotalWeight";
    case SS_ERR_DEGENERATE_DATA: return "DegenerateData";
    case SS_ERR_EMPTY_TABLE: return "EmptyTable";
    case SS_ERR_NETWORK_UNAVAILABLE: return "NetworkUnavailable";
    case SS_ERR_HTTP: return "HttpError";
    case SS_ERR_NOT_A_ZIP: return "NotAZip";
    case SS_ERR_MALFORMED_CATALOG: return "MalformedCatalog";
    case SS_ERR_MALFORMED_INPUT: return "MalformedInput";
    case SS_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* ss_last_error(void) { return last_error.c_str(); }

long ss_last_http_status(void) { return last_http_status; }

void ss_string_free(char* s) { std::free(s); }

ss_status ss_parse_scheme(const char* name, ss_scheme* out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    const auto scheme = parse_scheme(name);
    if (!scheme) throw Error(ErrorCode::invalid_argument, std::string("unknown weighting scheme: ") + name);
    *out = static_cast<ss_scheme>(static_cast<int>(*scheme));
  });
}

const char* ss_scheme_name(ss_scheme scheme) {
  switch (scheme) {
    case SS_SCHEME_SEGMENT: return "segment";
    case SS_SCHEME_ROUTE: return "route";
    case SS_SCHEME_TRAVERSAL: return "traversal";
    case SS_SCHEME_LOAD: return "load";
  }
  return "unknown";
}

ss_status ss_feed_open(const char* path, ss_feed** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    *out = new ss_feed{parse_feed(path)};
  });
}

void ss_feed_free(ss_feed* feed) { delete feed; }

const char* ss_feed_name(const ss_feed* feed) {
  return feed != nullptr ? feed->feed.source_name().c_str() : "";
}

void ss_feed_get_info(const ss_feed* feed, ss_feed_info* out) {
  if (feed == nullptr || out == nullptr) return;
  const FeedBundle& f = feed->feed;
  *out = ss_feed_info{f.stops().size(),      f.routes().size(), f.trips().size(),
                      f.stop_times().size(), f.shapes().size(), f.frequencies().size(),
                      f.diagnostics().total()};
}

ss_status ss_feed_diagnostics(const ss_feed* feed, char** text) {
  return guarded([&] {
    require(feed != nullptr && text != nullptr, "null argument");
    *text = dup_string(feed->feed.diagnostics().to_text());
  });
}

ss_status ss_feed_validate(const ss_feed* feed, size_t* issue_count, char** report) {
  return guarded([&] {
    require(feed != nullptr, "null feed");
    const auto issues = validate_feed(feed->feed);
    if (issue_count != nullptr) *issue_count = issues.size();
    if (report != nullptr) *report = dup_string(validation_report_text(issues));
  });
}

ss_status ss_busiest_day(const ss_feed* feed, int32_t* yyyymmdd, uint64_t* trip_count) {
  return guarded([&] {
    require(feed != nullptr, "null feed");
    const BusiestDay day = busiest_day(feed->feed);
    if (yyyymmdd != nullptr) *yyyymmdd = day.date.as_int();
    if (trip_count != nullptr) *trip_count = day.trip_count;
  });
}

ss_status ss_segments_extract(const ss_feed* feed, int32_t yyyymmdd, ss_segments** out) {
  return guarded([&] {
    require(feed != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    if (yyyymmdd == 0) {
      *out = new ss_segments{extract_segments(feed->feed)};
    } else {
      const auto date = ServiceDate::from_int(yyyymmdd);
      if (!date) throw Error(ErrorCode::invalid_argument, "invalid date " + std::to_string(yyyymmdd));
      *out = new ss_segments{extract_segments(feed->feed, *date)};
    }
  });
}

void ss_segments_free(ss_segments* segments) { delete segments; }

size_t ss_segments_row_count(const ss_segments* segments) {
  return segments != nullptr ? segments->table.rows.size() : 0;
}

size_t ss_segments_unique_count(const ss_segments* segments) {
  return segments != nullptr ? segments->table.segments.size() : 0;
}

int32_t ss_segments_date(const ss_segments* segments) {
  return segments != nullptr ? segments->table.measurement_date.as_int() : 0;
}

ss_status ss_segments_row(const ss_segments* segments, size_t index, ss_segment_row* out) {
  return guarded([&] {
    require(segments != nullptr && out != nullptr, "null argument");
    if (index >= segments->table.rows.size()) throw Error(ErrorCode::invalid_range, "row index out of range");
    const SegmentRow& r = segments->table.rows[index];
    *out = ss_segment_row{r.segment_id.c_str(), r.stop_id1.c_str(), r.stop_id2.c_str(),
                          r.route_id.c_str(),   r.direction_id,     r.traversals,
                          r.distance_m};
  });
}

ss_status ss_segments_serialize(const ss_segments* segments, ss_format format, char** out) {
  return guarded([&] {
    require(segments != nullptr && out != nullptr, "null argument");
    *out = dup_string(format == SS_FORMAT_GEOJSON ? segments_to_geojson(segments->table)
                                                  : segments_to_delimited(segments->table));
  });
}

ss_status ss_segments_write(const ss_segments* segments, ss_format format, const char* path) {
  return guarded([&] {
    require(segments != nullptr && path != nullptr, "null argument");
    export_segments(segments->table,
                    format == SS_FORMAT_GEOJSON ? SegmentFormat::geojson : SegmentFormat::delimited,
                    path);
  });
}

ss_status ss_segments_diagnostics(const ss_segments* segments, char** text) {
  return guarded([&] {
    require(segments != nullptr && text != nullptr, "null argument");
    *text = dup_string(segments->table.diagnostics.to_text());
  });
}

ss_status ss_loads_read(const char* path, ss_loads** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    *out = new ss_loads{read_load_map(path)};
  });
}

void ss_loads_free(ss_loads* loads) { delete loads; }

ss_status ss_summarize(const ss_segments* segments, double threshold_m, const ss_loads* loads,
                       ss_summary* out) {
  return guarded([&] {
    require(segments != nullptr && out != nullptr, "null argument");
    const SpacingSummary s = summarize(segments->table, threshold_m, loads_of(loads));
    ss_summary r{};
    r.segment_mean_m = s.segment_weighted_mean_m;
    r.route_mean_m = s.route_weighted_mean_m;
    r.traversal_mean_m = s.traversal_weighted_mean_m;
    r.has_load_mean = s.load_weighted_mean_m.has_value() ? 1 : 0;
    r.load_mean_m = s.load_weighted_mean_m.value_or(0.0);
    r.n_routes = s.n_routes;
    r.n_segments = s.n_segments;
    r.n_rows = s.n_rows;
    r.n_traversals = s.n_traversals;
    r.total_service_km = s.total_service_km;
    r.busiest_day = s.busiest_day.as_int();
    r.threshold_m = s.threshold_m;
    r.excluded_share_segment = s.excluded_share_segment;
    r.excluded_share_route = s.excluded_share_route;
    r.excluded_share_traversal = s.excluded_share_traversal;
    r.excluded_share_load = s.excluded_share_load.value_or(0.0);
    r.missing_load_segments = s.missing_load_segments;
    *out = r;
  });
}

ss_status ss_summary_text(const ss_segments* segments, double threshold_m, const ss_loads* loads,
                          char** text) {
  return guarded([&] {
    require(segments != nullptr && text != nullptr, "null argument");
    *text = dup_string(summary_to_text(summarize(segments->table, threshold_m, loads_of(loads))));
  });
}

ss_status ss_weighted_mean(const ss_segments* segments, ss_scheme scheme, double threshold_m,
                           const ss_loads* loads, double* mean_m, double* excluded_share) {
  return guarded([&] {
    require(segments != nullptr, "null segments");
    const auto ws = build_weights(segments->table, to_scheme(scheme), threshold_m, loads_of(loads));
    const double mean = weighted_mean(ws);
    if (mean_m != nullptr) *mean_m = mean;
    if (excluded_share != nullptr) *excluded_share = ws.excluded_share;
  });
}

ss_status ss_ecdf(const ss_segments* segments, ss_scheme scheme, double threshold_m,
                  const ss_loads* loads, ss_series** out) {
  return guarded([&] {
    require(segments != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const auto ws = build_weights(segments->table, to_scheme(scheme), threshold_m, loads_of(loads));
    const Ecdf ecdf = weighted_ecdf(ws);
    auto* s = make_series({"spacing_m", "cumulative_share"}, ecdf_to_delimited(ecdf));
    for (const auto& step : ecdf.steps()) {
      s->values.push_back(step.spacing_m);
      s->values.push_back(step.cumulative);
    }
    *out = s;
  });
}

ss_status ss_histogram(const ss_segments* segments, ss_scheme scheme, double threshold_m,
                       const ss_loads* loads, double bin_width_m, ss_series** out) {
  return guarded([&] {
    require(segments != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const auto ws = build_weights(segments->table, to_scheme(scheme), threshold_m, loads_of(loads));
    const auto bins = histogram(ws, bin_width_m);
    auto* s = make_series({"bin_start_m", "bin_end_m", "weight_share"}, histogram_to_delimited(bins));
    for (const auto& b : bins) {
      s->values.insert(s->values.end(), {b.bin_start_m, b.bin_end_m, b.weight_share});
    }
    *out = s;
  });
}

ss_status ss_kde(const ss_segments* segments, ss_scheme scheme, double threshold_m,
                 const ss_loads* loads, size_t grid_points, ss_series** out) {
  return guarded([&] {
    require(segments != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const auto ws = build_weights(segments->table, to_scheme(scheme), threshold_m, loads_of(loads));
    const auto grid = kde_grid(ws, grid_points);
    const auto density = kde(ws, grid);
    auto* s = make_series({"spacing_m", "density"}, kde_to_delimited(density));
    for (const auto& d : density) s->values.insert(s->values.end(), {d.spacing_m, d.density});
    *out = s;
  });
}

void ss_series_free(ss_series* series) { delete series; }

size_t ss_series_rows(const ss_series* series) {
  if (series == nullptr || series->columns.empty()) return 0;
  return series->values.size() / series->columns.size();
}

size_t ss_series_columns(const ss_series* series) {
  return series != nullptr ? series->columns.size() : 0;
}

const char* ss_series_column_name(const ss_series* series, size_t column) {
  if (series == nullptr || column >= series->columns.size()) return nullptr;
  return series->columns[column].c_str();
}

double ss_series_value(const ss_series* series, size_t row, size_t column) {
  if (series == nullptr || column >= series->columns.size() || row >= ss_series_rows(series)) {
    return __builtin_nan("");
  }
  return series->values[row * series->columns.size() + column];
}

ss_status ss_series_serialize(const ss_series* series, char** out) {
  return guarded([&] {
    require(series != nullptr && out != nullptr, "null argument");
    *out = dup_string(series->text);
  });
}

ss_status ss_series_write(const ss_series* series, const char* path) {
  return guarded([&] {
    require(series != nullptr && path != nullptr, "null argument");
    write_file_atomically(path, series->text);
  });
}

ss_status ss_signals_read(const char* path, ss_signals** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    *out = new ss_signals{read_signal_set(path)};
  });
}

ss_status ss_signals_from_points(const double* lat, const double* lon, size_t n, ss_signals** out) {
  return guarded([&] {
    require(out != nullptr && (n == 0 || (lat != nullptr && lon != nullptr)), "null argument");
    *out = nullptr;
    std::vector<GeoPoint> points;
    points.reserve(n);
    for (size_t i = 0; i < n; ++i) points.push_back({lat[i], lon[i]});
    *out = new ss_signals{make_signal_set(std::move(points), "memory")};
  });
}

void ss_signals_free(ss_signals* signals) { delete signals; }

size_t ss_signals_size(const ss_signals* signals) {
  return signals != nullptr ? signals->set.points.size() : 0;
}

ss_status ss_signals_count(const ss_segments* segments, const ss_signals* signals, double buffer_m,
                           ss_signal_counts** out) {
  return guarded([&] {
    require(segments != nullptr && signals != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    *out = new ss_signal_counts{signals_per_segment(segments->table, signals->set, buffer_m)};
  });
}

void ss_signal_counts_free(ss_signal_counts* counts) { delete counts; }

size_t ss_signal_counts_size(const ss_signal_counts* counts) {
  return counts != nullptr ? counts->counts.counts.size() : 0;
}

uint32_t ss_signal_count_at(const ss_signal_counts* counts, size_t index) {
  if (counts == nullptr || index >= counts->counts.counts.size()) return 0;
  return counts->counts.counts[index].signal_count;
}

ss_status ss_signal_counts_serialize(const ss_signal_counts* counts, char** out) {
  return guarded([&] {
    require(counts != nullptr && out != nullptr, "null argument");
    *out = dup_string(signal_counts_to_delimited(counts->counts));
  });
}

ss_status ss_signal_counts_write(const ss_signal_counts* counts, const char* path) {
  return guarded([&] {
    require(counts != nullptr && path != nullptr, "null argument");
    write_file_atomically(path, signal_counts_to_delimited(counts->counts));
  });
}

ss_status ss_geometric_fit_mle(const ss_signal_counts* counts, ss_scheme scheme,
                               const ss_loads* loads, ss_geometric_fit* out, ss_series** table) {
  return guarded([&] {
    require(counts != nullptr, "null counts");
    if (table != nullptr) *table = nullptr;
    const GeometricFit fit = fit_geometric_mle(counts->counts, to_scheme(scheme), loads_of(loads));
    if (out != nullptr) *out = ss_geometric_fit{fit.p_hat, fit.weighted_mean_count, fit.max_count};
    if (table != nullptr) {
      auto* s = make_series({"k", "observed_share", "geometric_pmf"}, geometric_fit_to_delimited(fit));
      for (std::uint32_t k = 0; k <= fit.max_count; ++k) {
        s->values.insert(s->values.end(), {static_cast<double>(k), fit.observed_share[k], fit.pmf[k]});
      }
      *table = s;
    }
  });
}

ss_status ss_catalog_fetch(const char* source, ss_catalog** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = nullptr;
    const std::string src = source != nullptr ? std::string(source) : ingest::default_catalog_source();
    *out = new ss_catalog{ingest::fetch_catalog(src)};
  });
}

void ss_catalog_free(ss_catalog* catalog) { delete catalog; }

size_t ss_catalog_size(const ss_catalog* catalog) {
  return catalog != nullptr ? catalog->entries.size() : 0;
}

ss_status ss_catalog_entry_at(const ss_catalog* catalog, size_t index, ss_catalog_entry* out) {
  return guarded([&] {
    require(catalog != nullptr && out != nullptr, "null argument");
    if (index >= catalog->entries.size()) throw Error(ErrorCode::invalid_range, "entry index out of range");
    const auto& e = catalog->entries[index];
    *out = ss_catalog_entry{e.id.c_str(),    e.provider.c_str(),       e.country.c_str(),
                            e.state.c_str(), e.urbanized_area.c_str(), e.url.c_str()};
  });
}

ss_status ss_catalog_filter(const ss_catalog* catalog, const char* provider, const char* state,
                            const char* urbanized_area, ss_catalog** out) {
  return guarded([&] {
    require(catalog != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const auto opt = [](const char* s) -> std::optional<std::string> {
      if (s == nullptr) return std::nullopt;
      return std::string(s);
    };
    ingest::CatalogFilter filter{opt(provider), opt(state), opt(urbanized_area), std::nullopt};
    *out = new ss_catalog{ingest::filter_catalog(catalog->entries, filter)};
  });
}

ss_status ss_catalog_download(const ss_catalog* catalog, const char* destination,
                              size_t parallelism, size_t* failed, char** report) {
  return guarded([&] {
    require(catalog != nullptr && destination != nullptr, "null argument");
    const auto outcomes = ingest::download_feeds(catalog->entries, destination, parallelism);
    size_t failures = 0;
    std::string text;
    for (const auto& o : outcomes) {
      if (o.result) {
        text += o.entry_id + "\tok\t" + o.result->path.string() + '\t' + o.result->sha256 + '\n';
      } else {
        ++failures;
        text += o.entry_id + "\terror\t" + o.error + '\n';
      }
    }
    if (failed != nullptr) *failed = failures;
    if (report != nullptr) *report = dup_string(text);
  });
}

}  // extern "C"
