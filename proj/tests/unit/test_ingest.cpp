#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "gtfs_builder.hpp"
#include "stopspacing/csv.hpp"
#include "stopspacing/error.hpp"
#include "stopspacing/ingest.hpp"
#include "stopspacing/zip_archive.hpp"

using namespace stopspacing;
using namespace stopspacing::ingest;
using testing_support::TempDir;

namespace {

class MockServer : public ::testing::Test {
 protected:
  void SetUp() override {
    testing_support::TempDir tmp;
    testing_support::figure_network().write_zip(tmp / "f.zip");
    zip_bytes_ = testing_support::read_file(tmp / "f.zip");

    server_.Get("/feed.zip", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(zip_bytes_, "application/zip");
    });
    server_.Get("/html", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("<html>login required</html>", "text/html");
    });
    server_.Get("/flaky.zip", [this](const httplib::Request&, httplib::Response& res) {
      if (flaky_calls_++ == 0) {
        res.status = 503;
        return;
      }
      res.set_content(zip_bytes_, "application/zip");
    });
    server_.Get("/down.zip", [this](const httplib::Request&, httplib::Response& res) {
      ++down_calls_;
      res.status = 500;
    });
    server_.Get("/missing.zip", [this](const httplib::Request&, httplib::Response& res) {
      ++missing_calls_;
      res.status = 404;
    });
    server_.Get("/catalog.csv", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(catalog_text(), "text/csv");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

  std::string catalog_text() const {
    return "mdb_source_id,data_type,location.country_code,location.subdivision_name,location.municipality,"
           "provider,urls.direct_download,urls.latest\n"
           "1,gtfs,US,Texas,Dallas,Dallas Area Rapid Transit," + url("/feed.zip") + ",\n"
           "2,gtfs,US,Texas,Austin,Capital Metro,," + url("/feed.zip") + "\n"
           "3,gtfs,US,Georgia,Atlanta,MARTA," + url("/feed.zip") + ",\n"
           "4,gtfs-rt,US,Texas,Dallas,DART realtime,https://example.invalid/rt,\n";
  }

  static HttpOptions fast() {
    HttpOptions o;
    o.initial_backoff = std::chrono::milliseconds(1);
    o.timeout_s = 10;
    return o;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string zip_bytes_;
  std::atomic<int> flaky_calls_{0};
  std::atomic<int> down_calls_{0};
  std::atomic<int> missing_calls_{0};
};

}  // namespace

TEST_F(MockServer, CatalogFilterByState) {
  const auto entries = fetch_catalog(url("/catalog.csv"));
  ASSERT_EQ(entries.size(), 3u);  // realtime row skipped
  const auto tx = filter_catalog(entries, {.state = "texas"});
  ASSERT_EQ(tx.size(), 2u);
  EXPECT_EQ(tx[0].provider, "Dallas Area Rapid Transit");
  EXPECT_EQ(tx[1].url, url("/feed.zip"));  // falls back to urls.latest
  EXPECT_EQ(filter_catalog(entries, {.provider = "marta"}).size(), 1u);
  EXPECT_EQ(filter_catalog(entries, {.state = "Texas", .urbanized_area = "Dallas"}).size(), 1u);
}

TEST_F(MockServer, CatalogFromLocalSnapshot) {
  TempDir tmp;
  testing_support::write_file(tmp / "catalog.csv", catalog_text());
  EXPECT_EQ(fetch_catalog((tmp / "catalog.csv").string()).size(), 3u);
  testing_support::write_file(tmp / "bad.csv", "name,link\nx,y\n");
  try {
    fetch_catalog((tmp / "bad.csv").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::malformed_catalog);
  }
}

TEST_F(MockServer, DownloadWritesZipAndManifest) {
  TempDir tmp;
  const CatalogEntry entry{"1", "DART", "US", "Texas", "Dallas", url("/feed.zip")};
  const DownloadResult first = download_feed(entry, tmp.path(), fast());
  EXPECT_EQ(first.path, tmp / "1.zip");
  EXPECT_TRUE(zip::is_zip_file(first.path));
  EXPECT_EQ(first.sha256, sha256_hex(zip_bytes_));
  const FeedBundle feed = parse_feed(first.path);
  EXPECT_EQ(feed.stops().size(), 5u);

  // Second run: same bytes, same checksum, still one manifest row.
  const DownloadResult second = download_feed(entry, tmp.path(), fast());
  EXPECT_EQ(second.sha256, first.sha256);
  csv::Table manifest(testing_support::read_file(tmp / "manifest.csv"));
  int rows = 0;
  while (manifest.next()) {
    ++rows;
    EXPECT_EQ(manifest.field("entry_id"), "1");
    EXPECT_EQ(manifest.field("sha256"), first.sha256);
  }
  EXPECT_EQ(rows, 1);
}

TEST_F(MockServer, HtmlBodyIsNotAZip) {
  TempDir tmp;
  try {
    download_feed({"9", "P", "", "", "", url("/html")}, tmp.path(), fast());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_a_zip);
  }
  EXPECT_FALSE(std::filesystem::exists(tmp / "9.zip"));
}

TEST_F(MockServer, NotFoundIsNotRetried) {
  TempDir tmp;
  try {
    download_feed({"9", "P", "", "", "", url("/missing.zip")}, tmp.path(), fast());
    FAIL();
  } catch (const HttpError& e) {
    EXPECT_EQ(e.status(), 404);
  }
  EXPECT_EQ(missing_calls_, 1);
}

TEST_F(MockServer, ServerErrorsAreRetried) {
  TempDir tmp;
  EXPECT_NO_THROW(download_feed({"f", "P", "", "", "", url("/flaky.zip")}, tmp.path(), fast()));
  EXPECT_EQ(flaky_calls_, 2);
  EXPECT_THROW(download_feed({"d", "P", "", "", "", url("/down.zip")}, tmp.path(), fast()), HttpError);
  EXPECT_EQ(down_calls_, 3);
}

TEST_F(MockServer, ConnectionRefusedIsNetworkUnavailable) {
  TempDir tmp;
  try {
    http_get("http://127.0.0.1:1/x", fast());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::network_unavailable);
  }
}

TEST_F(MockServer, ParallelDownloadsShareOneManifest) {
  TempDir tmp;
  std::vector<CatalogEntry> entries;
  for (int i = 0; i < 8; ++i) entries.push_back({"e" + std::to_string(i), "P", "", "", "", url("/feed.zip")});
  entries.push_back({"bad", "P", "", "", "", url("/missing.zip")});
  const auto outcomes = download_feeds(entries, tmp.path(), 4, fast());
  ASSERT_EQ(outcomes.size(), 9u);
  for (int i = 0; i < 8; ++i) EXPECT_TRUE(outcomes[i].result.has_value()) << outcomes[i].error;
  EXPECT_FALSE(outcomes[8].result.has_value());
  EXPECT_NE(outcomes[8].error.find("404"), std::string::npos);
  csv::Table manifest(testing_support::read_file(tmp / "manifest.csv"));
  int rows = 0;
  while (manifest.next()) ++rows;
  EXPECT_EQ(rows, 8);
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
