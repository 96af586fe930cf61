#ifndef STOPSPACING_H
#define STOPSPACING_H

#include <stddef.h>
#include <stdint.h>

#if defined(STOPSPACING_BUILDING_LIBRARY)
#define SS_API __attribute__((visibility("default")))
#else
#define SS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ss_status {
  SS_OK = 0,
  SS_ERR_INVALID_ARGUMENT,
  SS_ERR_IO,
  SS_ERR_MISSING_REQUIRED_FILE,
  SS_ERR_MALFORMED_ROW,
  SS_ERR_NO_SERVICE_INFO,
  SS_ERR_INVALID_RANGE,
  SS_ERR_LOAD_MAP_MISSING,
  SS_ERR_ALL_EXCLUDED,
  SS_ERR_ZERO_TOTAL_WEIGHT,
  SS_ERR_DEGENERATE_DATA,
  SS_ERR_EMPTY_TABLE,
  SS_ERR_NETWORK_UNAVAILABLE,
  SS_ERR_HTTP,
  SS_ERR_NOT_A_ZIP,
  SS_ERR_MALFORMED_CATALOG,
  SS_ERR_MALFORMED_INPUT,
  SS_ERR_INTERNAL
} ss_status;

typedef enum ss_scheme {
  SS_SCHEME_SEGMENT = 0,
  SS_SCHEME_ROUTE,
  SS_SCHEME_TRAVERSAL,
  SS_SCHEME_LOAD
} ss_scheme;

typedef enum ss_format { SS_FORMAT_DELIMITED = 0, SS_FORMAT_GEOJSON } ss_format;

/* Pass as threshold_m to keep every spacing. */
#define SS_NO_THRESHOLD (__builtin_inf())
#define SS_DEFAULT_THRESHOLD_M 3000.0
#define SS_DEFAULT_BUFFER_M 5.5

typedef struct ss_feed ss_feed;
typedef struct ss_segments ss_segments;
typedef struct ss_loads ss_loads;
typedef struct ss_series ss_series;
typedef struct ss_signals ss_signals;
typedef struct ss_signal_counts ss_signal_counts;
typedef struct ss_catalog ss_catalog;

SS_API const char* ss_version(void);
SS_API const char* ss_status_name(ss_status status);
/* Message of the last failure on the calling thread; "" when none. */
SS_API const char* ss_last_error(void);
/* HTTP status of the last SS_ERR_HTTP failure on the calling thread. */
SS_API long ss_last_http_status(void);
/* Frees strings returned through char** out-parameters. */
SS_API void ss_string_free(char* s);
SS_API ss_status ss_parse_scheme(const char* name, ss_scheme* out);
SS_API const char* ss_scheme_name(ss_scheme scheme);

/* Feeds: a GTFS directory or zip archive. */
typedef struct ss_feed_info {
  size_t stops;
  size_t routes;
  size_t trips;
  size_t stop_times;
  size_t shape_points;
  size_t frequencies;
  size_t diagnostics;
} ss_feed_info;

SS_API ss_status ss_feed_open(const char* path, ss_feed** out);
SS_API void ss_feed_free(ss_feed* feed);
SS_API const char* ss_feed_name(const ss_feed* feed);
SS_API void ss_feed_get_info(const ss_feed* feed, ss_feed_info* out);
SS_API ss_status ss_feed_diagnostics(const ss_feed* feed, char** text);
SS_API ss_status ss_feed_validate(const ss_feed* feed, size_t* issue_count, char** report);
SS_API ss_status ss_busiest_day(const ss_feed* feed, int32_t* yyyymmdd, uint64_t* trip_count);

/* Segment tables. yyyymmdd == 0 measures on the busiest day. */
typedef struct ss_segment_row {
  const char* segment_id;
  const char* stop_id1;
  const char* stop_id2;
  const char* route_id;
  int direction_id;
  uint64_t traversals;
  double distance_m;
} ss_segment_row;

SS_API ss_status ss_segments_extract(const ss_feed* feed, int32_t yyyymmdd, ss_segments** out);
SS_API void ss_segments_free(ss_segments* segments);
SS_API size_t ss_segments_row_count(const ss_segments* segments);
SS_API size_t ss_segments_unique_count(const ss_segments* segments);
SS_API int32_t ss_segments_date(const ss_segments* segments);
/* String fields stay valid until the table is freed. */
SS_API ss_status ss_segments_row(const ss_segments* segments, size_t index, ss_segment_row* out);
SS_API ss_status ss_segments_serialize(const ss_segments* segments, ss_format format, char** out);
SS_API ss_status ss_segments_write(const ss_segments* segments, ss_format format, const char* path);
SS_API ss_status ss_segments_diagnostics(const ss_segments* segments, char** text);

/* Passenger loads: stop_id1,stop_id2,avg_load. */
SS_API ss_status ss_loads_read(const char* path, ss_loads** out);
SS_API void ss_loads_free(ss_loads* loads);

/* Statistics. loads may be NULL unless the load scheme is requested. */
typedef struct ss_summary {
  double segment_mean_m;
  double route_mean_m;
  double traversal_mean_m;
  int has_load_mean;
  double load_mean_m;
  size_t n_routes;
  size_t n_segments;
  size_t n_rows;
  uint64_t n_traversals;
  double total_service_km;
  int32_t busiest_day;
  double threshold_m;
  double excluded_share_segment;
  double excluded_share_route;
  double excluded_share_traversal;
  double excluded_share_load;
  size_t missing_load_segments;
} ss_summary;

SS_API ss_status ss_summarize(const ss_segments* segments, double threshold_m,
                              const ss_loads* loads, ss_summary* out);
SS_API ss_status ss_summary_text(const ss_segments* segments, double threshold_m,
                                 const ss_loads* loads, char** text);
SS_API ss_status ss_weighted_mean(const ss_segments* segments, ss_scheme scheme,
                                  double threshold_m, const ss_loads* loads, double* mean_m,
                                  double* excluded_share);

/* Plot-ready series: a numeric table with named columns. */
SS_API ss_status ss_ecdf(const ss_segments* segments, ss_scheme scheme, double threshold_m,
                         const ss_loads* loads, ss_series** out);
SS_API ss_status ss_histogram(const ss_segments* segments, ss_scheme scheme, double threshold_m,
                              const ss_loads* loads, double bin_width_m, ss_series** out);
SS_API ss_status ss_kde(const ss_segments* segments, ss_scheme scheme, double threshold_m,
                        const ss_loads* loads, size_t grid_points, ss_series** out);
SS_API void ss_series_free(ss_series* series);
SS_API size_t ss_series_rows(const ss_series* series);
SS_API size_t ss_series_columns(const ss_series* series);
SS_API const char* ss_series_column_name(const ss_series* series, size_t column);
SS_API double ss_series_value(const ss_series* series, size_t row, size_t column);
SS_API ss_status ss_series_serialize(const ss_series* series, char** out);
SS_API ss_status ss_series_write(const ss_series* series, const char* path);

/* Traffic signals. */
typedef struct ss_geometric_fit {
  double p_hat;
  double weighted_mean_count;
  uint32_t max_count;
} ss_geometric_fit;

SS_API ss_status ss_signals_read(const char* path, ss_signals** out);
SS_API ss_status ss_signals_from_points(const double* lat, const double* lon, size_t n,
                                        ss_signals** out);
SS_API void ss_signals_free(ss_signals* signals);
SS_API size_t ss_signals_size(const ss_signals* signals);
SS_API ss_status ss_signals_count(const ss_segments* segments, const ss_signals* signals,
                                  double buffer_m, ss_signal_counts** out);
SS_API void ss_signal_counts_free(ss_signal_counts* counts);
SS_API size_t ss_signal_counts_size(const ss_signal_counts* counts);
SS_API uint32_t ss_signal_count_at(const ss_signal_counts* counts, size_t index);
SS_API ss_status ss_signal_counts_serialize(const ss_signal_counts* counts, char** out);
SS_API ss_status ss_signal_counts_write(const ss_signal_counts* counts, const char* path);
/* table (optional) receives k, observed_share, geometric_pmf. */
SS_API ss_status ss_geometric_fit_mle(const ss_signal_counts* counts, ss_scheme scheme,
                                      const ss_loads* loads, ss_geometric_fit* out,
                                      ss_series** table);

/* Feed catalog. source == NULL uses $STOPSPACING_CATALOG or the public catalog. */
typedef struct ss_catalog_entry {
  const char* id;
  const char* provider;
  const char* country;
  const char* state;
  const char* urbanized_area;
  const char* url;
} ss_catalog_entry;

SS_API ss_status ss_catalog_fetch(const char* source, ss_catalog** out);
SS_API void ss_catalog_free(ss_catalog* catalog);
SS_API size_t ss_catalog_size(const ss_catalog* catalog);
SS_API ss_status ss_catalog_entry_at(const ss_catalog* catalog, size_t index,
                                     ss_catalog_entry* out);
/* NULL filters match everything; matching is case-insensitive. */
SS_API ss_status ss_catalog_filter(const ss_catalog* catalog, const char* provider,
                                   const char* state, const char* urbanized_area,
                                   ss_catalog** out);
/* One report line per entry: id, "ok" or "error", then path and sha256 or
   the error message, tab separated. Failed downloads are counted, not
   returned as a status. */
SS_API ss_status ss_catalog_download(const ss_catalog* catalog, const char* destination,
                                     size_t parallelism, size_t* failed, char** report);

#ifdef __cplusplus
}
#endif

#endif
