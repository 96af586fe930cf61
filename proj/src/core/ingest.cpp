#include "stopspacing/ingest.hpp"

#include <curl/curl.h>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "stopspacing/csv.hpp"
#include "stopspacing/error.hpp"
#include "stopspacing/zip_archive.hpp"

namespace stopspacing::ingest {

namespace {

std::once_flag curl_init_flag;
std::mutex manifest_mutex;

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_url(std::string_view s) {
  return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0;
}

std::optional<std::size_t> first_column(const csv::Table& table,
                                        std::initializer_list<std::string_view> names) {
  for (auto n : names) {
    if (auto c = table.column(n)) return c;
  }
  return std::nullopt;
}

size_t append_body(char* data, size_t size, size_t nmemb, void* user) {
  static_cast<std::string*>(user)->append(data, size * nmemb);
  return size * nmemb;
}

struct CurlHandle {
  CURL* handle = curl_easy_init();
  ~CurlHandle() {
    if (handle != nullptr) curl_easy_cleanup(handle);
  }
};

// One attempt. Returns the HTTP status; throws network_unavailable on
// transport failure.
long http_get_once(const std::string& url, long timeout_s, std::string& body) {
  std::call_once(curl_init_flag, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
  CurlHandle curl;
  if (curl.handle == nullptr) throw Error(ErrorCode::network_unavailable, "curl_easy_init failed");
  body.clear();
  curl_easy_setopt(curl.handle, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.handle, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.handle, CURLOPT_MAXREDIRS, 10L);
  curl_easy_setopt(curl.handle, CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(curl.handle, CURLOPT_CONNECTTIMEOUT, 30L);
  curl_easy_setopt(curl.handle, CURLOPT_TIMEOUT, timeout_s);
  curl_easy_setopt(curl.handle, CURLOPT_USERAGENT, "stopspacing/0.1");
  curl_easy_setopt(curl.handle, CURLOPT_WRITEFUNCTION, append_body);
  curl_easy_setopt(curl.handle, CURLOPT_WRITEDATA, &body);
  const CURLcode rc = curl_easy_perform(curl.handle);
  if (rc != CURLE_OK) {
    throw Error(ErrorCode::network_unavailable,
                "request to " + url + " failed: " + curl_easy_strerror(rc));
  }
  long status = 0;
  curl_easy_getinfo(curl.handle, CURLINFO_RESPONSE_CODE, &status);
  return status;
}

std::string read_local(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open catalog snapshot " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string file_name_for(const CatalogEntry& entry) {
  std::string base = entry.id.empty() ? entry.provider : entry.id;
  std::string out;
  for (unsigned char c : base) {
    out.push_back(std::isalnum(c) || c == '-' || c == '_' || c == '.' ? static_cast<char>(c) : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "feed";
  return out + ".zip";
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_atomically(const std::filesystem::path& target, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  const auto temp = target.parent_path() /
                    ("." + target.filename().string() + ".part." + std::to_string(rd()) + "." +
                     std::to_string(counter++));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + temp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(temp, ec);
      throw Error(ErrorCode::io, "failed writing " + temp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, target, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw Error(ErrorCode::io, "cannot move download into place at " + target.string());
  }
}

// Replaces or appends the entry's manifest row. Callers hold manifest_mutex.
void update_manifest(const std::filesystem::path& destination, const CatalogEntry& entry,
                     const std::string& checksum) {
  const auto path = destination / kManifestFile;
  std::map<std::string, std::vector<std::string>> rows;
  std::vector<std::string> order;
  std::error_code ec;
  if (std::filesystem::exists(path, ec)) {
    const std::string text = read_local(path);
    csv::Reader reader(text);
    std::vector<std::string> fields;
    bool header = true;
    while (reader.next(fields)) {
      if (header) {
        header = false;
        continue;
      }
      if (fields.size() < 4) continue;
      if (!rows.contains(fields[0])) order.push_back(fields[0]);
      rows[fields[0]] = fields;
    }
  }
  const std::string id = entry.id.empty() ? entry.provider : entry.id;
  if (!rows.contains(id)) order.push_back(id);
  rows[id] = {id, entry.url, checksum, utc_timestamp()};

  std::ostringstream os;
  os << "entry_id,url,sha256,downloaded_at\n";
  for (const auto& key : order) {
    const auto& r = rows[key];
    os << csv::escape(r[0]) << ',' << csv::escape(r[1]) << ',' << csv::escape(r[2]) << ','
       << csv::escape(r[3]) << '\n';
  }
  write_atomically(path, os.str());
}

}  // namespace

std::vector<CatalogEntry> parse_catalog(std::string_view text) {
  csv::Table table(text);
  const auto id_col = first_column(table, {"mdb_source_id", "id"});
  const auto provider_col = first_column(table, {"provider"});
  const auto country_col = first_column(table, {"location.country_code", "country"});
  const auto state_col = first_column(table, {"location.subdivision_name", "state"});
  const auto area_col = first_column(table, {"location.municipality", "urbanized_area"});
  const auto direct_col = first_column(table, {"urls.direct_download", "url"});
  const auto latest_col = first_column(table, {"urls.latest"});
  const auto type_col = first_column(table, {"data_type"});
  if (!provider_col || (!direct_col && !latest_col)) {
    throw Error(ErrorCode::malformed_catalog, "catalog lacks provider or download URL columns");
  }
  std::vector<CatalogEntry> entries;
  while (table.next()) {
    if (type_col) {
      const auto type = lowercase(table.field(type_col));
      if (!type.empty() && type != "gtfs") continue;
    }
    CatalogEntry e;
    e.id = std::string(table.field(id_col));
    e.provider = std::string(table.field(provider_col));
    e.country = std::string(table.field(country_col));
    e.state = std::string(table.field(state_col));
    e.urbanized_area = std::string(table.field(area_col));
    e.url = std::string(table.field(direct_col));
    if (e.url.empty()) e.url = std::string(table.field(latest_col));
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<CatalogEntry> fetch_catalog(const std::string& source) {
  if (is_url(source)) return parse_catalog(http_get(source));
  return parse_catalog(read_local(source));
}

std::string default_catalog_source() {
  if (const char* env = std::getenv(std::string(kCatalogEnvVar).c_str()); env != nullptr && *env) {
    return env;
  }
  return std::string(kDefaultCatalogUrl);
}

std::vector<CatalogEntry> filter_catalog(std::span<const CatalogEntry> entries,
                                         const CatalogFilter& filter) {
  const auto matches = [](const std::optional<std::string>& wanted, const std::string& value) {
    return !wanted || lowercase(*wanted) == lowercase(value);
  };
  std::vector<CatalogEntry> out;
  for (const auto& e : entries) {
    if (matches(filter.provider, e.provider) && matches(filter.state, e.state) &&
        matches(filter.urbanized_area, e.urbanized_area) && matches(filter.country, e.country)) {
      out.push_back(e);
    }
  }
  return out;
}

std::string http_get(const std::string& url, const HttpOptions& options) {
  std::string body;
  auto backoff = options.initial_backoff;
  const int attempts = std::max(1, options.attempts);
  for (int attempt = 1;; ++attempt) {
    try {
      const long status = http_get_once(url, options.timeout_s, body);
      if (status >= 200 && status < 300) return body;
      const bool retryable = status == 429 || status >= 500;
      if (!retryable || attempt >= attempts) throw HttpError(status, url);
    } catch (const HttpError&) {
      throw;
    } catch (const Error&) {
      if (attempt >= attempts) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::io, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

DownloadResult download_feed(const CatalogEntry& entry, const std::filesystem::path& destination,
                             const HttpOptions& options) {
  if (!entry.downloadable()) {
    throw Error(ErrorCode::invalid_argument, "catalog entry " + entry.id + " has no download URL");
  }
  const std::string body = http_get(entry.url, options);
  if (!zip::has_zip_magic(body)) {
    throw Error(ErrorCode::not_a_zip, "response from " + entry.url + " is not a zip archive");
  }
  std::error_code ec;
  std::filesystem::create_directories(destination, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + destination.string());

  DownloadResult result;
  result.entry_id = entry.id;
  result.path = destination / file_name_for(entry);
  result.sha256 = sha256_hex(body);
  write_atomically(result.path, body);
  {
    std::lock_guard lock(manifest_mutex);
    update_manifest(destination, entry, result.sha256);
  }
  return result;
}

std::vector<DownloadOutcome> download_feeds(std::span<const CatalogEntry> entries,
                                            const std::filesystem::path& destination,
                                            std::size_t parallelism, const HttpOptions& options) {
  std::vector<DownloadOutcome> outcomes(entries.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(1, entries.size()));
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < entries.size(); i = next++) {
        outcomes[i].entry_id = entries[i].id;
        try {
          outcomes[i].result = download_feed(entries[i], destination, options);
        } catch (const std::exception& e) {
          outcomes[i].error = e.what();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  return outcomes;
}

}  // namespace stopspacing::ingest
