#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Optional network access: nothing else in the library depends on this
// module, and every other operation works from local files.
namespace stopspacing::ingest {

// Public CSV export of the Mobility Database catalog.
inline constexpr std::string_view kDefaultCatalogUrl =
    "https://share.mobilitydata.org/catalogs-csv";

// Environment variable that, when set, replaces the default catalog source.
inline constexpr std::string_view kCatalogEnvVar = "STOPSPACING_CATALOG";

struct CatalogEntry {
  std::string id;
  std::string provider;
  std::string country;
  std::string state;
  std::string urbanized_area;
  std::string url;

  bool downloadable() const { return !url.empty(); }
};

// Parses a catalog CSV. Understands the Mobility Database column names
// (mdb_source_id, provider, location.country_code, location.subdivision_name,
// location.municipality, urls.direct_download, urls.latest, data_type) and the
// short forms id, provider, country, state, urbanized_area, url. Non-GTFS
// rows (e.g. realtime feeds) are skipped. Throws Error(malformed_catalog)
// when the provider or URL column is missing.
std::vector<CatalogEntry> parse_catalog(std::string_view text);

// `source` is an http(s) URL or a local snapshot file. Throws
// Error(network_unavailable), HttpError or Error(malformed_catalog).
std::vector<CatalogEntry> fetch_catalog(const std::string& source);

// Catalog source to use when none is given: $STOPSPACING_CATALOG or the
// public catalog URL.
std::string default_catalog_source();

// Case-insensitive exact matches; unset fields match everything.
struct CatalogFilter {
  std::optional<std::string> provider;
  std::optional<std::string> state;
  std::optional<std::string> urbanized_area;
  std::optional<std::string> country;
};

std::vector<CatalogEntry> filter_catalog(std::span<const CatalogEntry> entries,
                                         const CatalogFilter& filter);

struct HttpOptions {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  long timeout_s = 300;
};

// GET with retries on connection failures, 429 and 5xx, backing off
// exponentially. Throws Error(network_unavailable) or HttpError.
std::string http_get(const std::string& url, const HttpOptions& options = {});

std::string sha256_hex(std::string_view bytes);

struct DownloadResult {
  std::string entry_id;
  std::filesystem::path path;
  std::string sha256;
};

inline constexpr std::string_view kManifestFile = "manifest.csv";

// Downloads one feed to destination/<entry id>.zip through a temporary file
// and a rename, then records entry_id,url,sha256,downloaded_at in
// destination/manifest.csv. Throws Error(invalid_argument) for entries
// without a URL, Error(not_a_zip) when the body is not a zip archive,
// Error(network_unavailable) or HttpError.
DownloadResult download_feed(const CatalogEntry& entry, const std::filesystem::path& destination,
                             const HttpOptions& options = {});

struct DownloadOutcome {
  std::string entry_id;
  std::optional<DownloadResult> result;
  std::string error;  // set when result is empty
};

// Downloads entries concurrently with at most `parallelism` transfers in
// flight. Outcomes are returned in input order.
std::vector<DownloadOutcome> download_feeds(std::span<const CatalogEntry> entries,
                                            const std::filesystem::path& destination,
                                            std::size_t parallelism = 4,
                                            const HttpOptions& options = {});

}  // namespace stopspacing::ingest
