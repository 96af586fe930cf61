// stopspacing command line. Everything here goes through the C API; the CLI
// only parses flags, names output files and prints results.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "stopspacing/stopspacing.h"

namespace fs = std::filesystem;

namespace {

// Domain failure inside a subcommand; becomes exit code 1.
struct Failure {
  std::string message;
};

void check(ss_status status, const std::string& context) {
  if (status != SS_OK) {
    throw Failure{context + ": " + ss_status_name(status) + ": " + ss_last_error()};
  }
}

std::string take_string(char* s) {
  std::string out = s != nullptr ? s : "";
  ss_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using FeedPtr = std::unique_ptr<ss_feed, Deleter<ss_feed, ss_feed_free>>;
using SegmentsPtr = std::unique_ptr<ss_segments, Deleter<ss_segments, ss_segments_free>>;
using LoadsPtr = std::unique_ptr<ss_loads, Deleter<ss_loads, ss_loads_free>>;
using SeriesPtr = std::unique_ptr<ss_series, Deleter<ss_series, ss_series_free>>;
using SignalsPtr = std::unique_ptr<ss_signals, Deleter<ss_signals, ss_signals_free>>;
using CountsPtr = std::unique_ptr<ss_signal_counts, Deleter<ss_signal_counts, ss_signal_counts_free>>;
using CatalogPtr = std::unique_ptr<ss_catalog, Deleter<ss_catalog, ss_catalog_free>>;

struct Options {
  std::vector<std::string> gtfs;
  std::string out = ".";
  double threshold_m = SS_DEFAULT_THRESHOLD_M;
  bool no_threshold = false;
  std::string scheme = "traversal";
  double bin_width_m = 50.0;
  double buffer_m = SS_DEFAULT_BUFFER_M;
  std::string loads;
  std::string signals;
  int32_t date = 0;
  std::size_t grid_points = 512;
  std::string catalog;
  std::optional<std::string> provider;
  std::optional<std::string> state;
  std::optional<std::string> area;
  std::size_t parallel = 4;

  double threshold() const { return no_threshold ? SS_NO_THRESHOLD : threshold_m; }
};

struct FeedContext {
  FeedPtr feed;
  SegmentsPtr segments;
  std::string stem;
};

FeedContext load_feed(const std::string& path, int32_t date) {
  FeedContext ctx;
  ss_feed* feed = nullptr;
  check(ss_feed_open(path.c_str(), &feed), path);
  ctx.feed.reset(feed);
  ctx.stem = ss_feed_name(feed);
  ss_segments* segments = nullptr;
  check(ss_segments_extract(feed, date, &segments), path);
  ctx.segments.reset(segments);
  return ctx;
}

LoadsPtr load_loads(const Options& o) {
  if (o.loads.empty()) return nullptr;
  ss_loads* loads = nullptr;
  check(ss_loads_read(o.loads.c_str(), &loads), o.loads);
  return LoadsPtr(loads);
}

ss_scheme scheme_of(const Options& o) {
  ss_scheme scheme{};
  check(ss_parse_scheme(o.scheme.c_str(), &scheme), "--scheme");
  return scheme;
}

fs::path out_path(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  return fs::path(o.out) / name;
}

void write_series(ss_series* series, const fs::path& path, std::ostream& log) {
  check(ss_series_write(series, path.c_str()), path.string());
  log << "wrote " << path.string() << '\n';
}

// Each feed writes its own files and its own log; logs are printed in input
// order once every feed is done.
int run_per_feed(const Options& o,
                 const std::function<void(const std::string&, const LoadsPtr&, std::ostream&)>& job) {
  LoadsPtr loads;
  try {
    loads = load_loads(o);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return 1;
  }
  std::vector<std::string> logs(o.gtfs.size());
  std::vector<std::string> errors(o.gtfs.size());
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < o.gtfs.size(); ++i) {
    workers.emplace_back([&, i] {
      std::ostringstream log;
      try {
        job(o.gtfs[i], loads, log);
      } catch (const Failure& f) {
        errors[i] = f.message;
      } catch (const std::exception& e) {
        errors[i] = o.gtfs[i] + ": " + e.what();
      }
      logs[i] = log.str();
    });
  }
  for (auto& w : workers) w.join();
  int rc = 0;
  for (std::size_t i = 0; i < o.gtfs.size(); ++i) {
    std::cout << logs[i];
    if (!errors[i].empty()) {
      std::cerr << "error: " << errors[i] << '\n';
      rc = 1;
    }
  }
  return rc;
}

void cmd_segments(const Options& o, const std::string& path, const LoadsPtr&, std::ostream& log) {
  const FeedContext ctx = load_feed(path, o.date);
  const auto csv = out_path(o, ctx.stem + "_segments.csv");
  const auto geojson = out_path(o, ctx.stem + "_segments.geojson");
  check(ss_segments_write(ctx.segments.get(), SS_FORMAT_DELIMITED, csv.c_str()), csv.string());
  check(ss_segments_write(ctx.segments.get(), SS_FORMAT_GEOJSON, geojson.c_str()), geojson.string());
  char* diag = nullptr;
  check(ss_segments_diagnostics(ctx.segments.get(), &diag), path);
  const std::string diagnostics = take_string(diag);
  log << ctx.stem << ": " << ss_segments_row_count(ctx.segments.get()) << " rows, "
      << ss_segments_unique_count(ctx.segments.get()) << " segments on "
      << ss_segments_date(ctx.segments.get()) << '\n';
  if (!diagnostics.empty()) log << diagnostics;
  log << "wrote " << csv.string() << '\n' << "wrote " << geojson.string() << '\n';
}

void cmd_summary(const Options& o, const std::string& path, const LoadsPtr& loads, std::ostream& log) {
  const FeedContext ctx = load_feed(path, o.date);
  char* text = nullptr;
  check(ss_summary_text(ctx.segments.get(), o.threshold(), loads.get(), &text), path);
  log << take_string(text);
}

void cmd_ecdf(const Options& o, const std::string& path, const LoadsPtr& loads, std::ostream& log) {
  const FeedContext ctx = load_feed(path, o.date);
  ss_series* series = nullptr;
  check(ss_ecdf(ctx.segments.get(), scheme_of(o), o.threshold(), loads.get(), &series), path);
  SeriesPtr owned(series);
  write_series(series, out_path(o, ctx.stem + "_ecdf_" + o.scheme + ".csv"), log);
}

void cmd_hist(const Options& o, const std::string& path, const LoadsPtr& loads, std::ostream& log) {
  const FeedContext ctx = load_feed(path, o.date);
  ss_series* series = nullptr;
  check(ss_histogram(ctx.segments.get(), scheme_of(o), o.threshold(), loads.get(), o.bin_width_m,
                     &series),
        path);
  SeriesPtr owned(series);
  write_series(series, out_path(o, ctx.stem + "_hist_" + o.scheme + ".csv"), log);
}

void cmd_kde(const Options& o, const std::string& path, const LoadsPtr& loads, std::ostream& log) {
  const FeedContext ctx = load_feed(path, o.date);
  ss_series* series = nullptr;
  check(ss_kde(ctx.segments.get(), scheme_of(o), o.threshold(), loads.get(), o.grid_points, &series),
        path);
  SeriesPtr owned(series);
  write_series(series, out_path(o, ctx.stem + "_kde_" + o.scheme + ".csv"), log);
}

void cmd_signals(const Options& o, const std::string& path, const LoadsPtr& loads,
                 const ss_signals* signals, std::ostream& log) {
  const FeedContext ctx = load_feed(path, o.date);
  ss_signal_counts* counts = nullptr;
  check(ss_signals_count(ctx.segments.get(), signals, o.buffer_m, &counts), path);
  CountsPtr owned_counts(counts);
  const auto counts_path = out_path(o, ctx.stem + "_signal_counts.csv");
  check(ss_signal_counts_write(counts, counts_path.c_str()), counts_path.string());
  log << "wrote " << counts_path.string() << '\n';

  ss_geometric_fit fit{};
  ss_series* table = nullptr;
  check(ss_geometric_fit_mle(counts, scheme_of(o), loads.get(), &fit, &table), path);
  SeriesPtr owned_table(table);
  write_series(table, out_path(o, ctx.stem + "_signal_fit_" + o.scheme + ".csv"), log);
  log << ctx.stem << ": geometric p_hat " << fit.p_hat << " (weighted mean "
      << fit.weighted_mean_count << " signals per segment, " << o.scheme << " weights)\n";
}

int cmd_download(const Options& o) {
  try {
    ss_catalog* catalog = nullptr;
    check(ss_catalog_fetch(o.catalog.empty() ? nullptr : o.catalog.c_str(), &catalog), "catalog");
    CatalogPtr all(catalog);
    const auto c = [](const std::optional<std::string>& s) { return s ? s->c_str() : nullptr; };
    ss_catalog* filtered = nullptr;
    check(ss_catalog_filter(catalog, c(o.provider), c(o.state), c(o.area), &filtered), "filter");
    CatalogPtr selected(filtered);
    if (ss_catalog_size(filtered) == 0) {
      std::cout << "no catalog entries match\n";
      return 0;
    }
    std::size_t failed = 0;
    char* report = nullptr;
    check(ss_catalog_download(filtered, o.out.c_str(), o.parallel, &failed, &report), "download");
    std::cout << take_string(report);
    if (failed > 0) {
      std::cerr << "error: " << failed << " of " << ss_catalog_size(filtered)
                << " downloads failed\n";
      return 1;
    }
    return 0;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bus stop spacing from GTFS feeds"};
  app.require_subcommand(1);
  Options o;

  const auto add_feed_opts = [&](CLI::App* sub) {
    sub->add_option("--gtfs", o.gtfs, "GTFS zip or directory (repeatable)")->required()->check(CLI::ExistingPath);
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--date", o.date, "Measurement date YYYYMMDD (default: busiest day)")
        ->check(CLI::Range(19000101, 29991231));
  };
  const auto add_stats_opts = [&](CLI::App* sub) {
    sub->add_option("--threshold", o.threshold_m, "Exclude spacings above this many meters")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_flag("--no-threshold", o.no_threshold, "Keep every spacing");
    sub->add_option("--loads", o.loads, "stop_id1,stop_id2,avg_load file")->check(CLI::ExistingFile);
  };
  const auto add_scheme = [&](CLI::App* sub) {
    sub->add_option("--scheme", o.scheme, "segment, route, traversal or load")
        ->check(CLI::IsMember({"segment", "route", "traversal", "load"}))
        ->capture_default_str();
  };

  auto* segments = app.add_subcommand("segments", "Write the segment table as CSV and GeoJSON");
  add_feed_opts(segments);

  auto* summary = app.add_subcommand("summary", "Print weighted means and counts");
  add_feed_opts(summary);
  add_stats_opts(summary);

  auto* ecdf = app.add_subcommand("ecdf", "Write the weighted ECDF");
  add_feed_opts(ecdf);
  add_stats_opts(ecdf);
  add_scheme(ecdf);

  auto* hist = app.add_subcommand("hist", "Write weighted histogram bins");
  add_feed_opts(hist);
  add_stats_opts(hist);
  add_scheme(hist);
  hist->add_option("--bin-width", o.bin_width_m, "Bin width in meters")->check(CLI::PositiveNumber)->capture_default_str();

  auto* kde = app.add_subcommand("kde", "Write a weighted kernel density grid");
  add_feed_opts(kde);
  add_stats_opts(kde);
  add_scheme(kde);
  kde->add_option("--grid-points", o.grid_points, "Number of grid points")->check(CLI::Range(2, 1000000))->capture_default_str();

  auto* signals = app.add_subcommand("signals", "Count signals per segment and fit a geometric law");
  add_feed_opts(signals);
  add_scheme(signals);
  signals->add_option("--signals", o.signals, "Signal locations (lat,lon)")->required()->check(CLI::ExistingFile);
  signals->add_option("--buffer", o.buffer_m, "Buffer around segments in meters")->check(CLI::PositiveNumber)->capture_default_str();
  signals->add_option("--loads", o.loads, "stop_id1,stop_id2,avg_load file")->check(CLI::ExistingFile);

  auto* download = app.add_subcommand("download", "Download feeds listed in the catalog");
  download->add_option("--catalog", o.catalog, "Catalog URL or local snapshot");
  download->add_option("--provider", o.provider, "Provider name");
  download->add_option("--state", o.state, "State or subdivision");
  download->add_option("--area", o.area, "Urbanized area (municipality)");
  download->add_option("--out", o.out, "Destination directory")->capture_default_str();
  download->add_option("--parallel", o.parallel, "Concurrent downloads")->check(CLI::Range(1, 64))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  using namespace std::placeholders;
  if (segments->parsed()) return run_per_feed(o, std::bind(cmd_segments, std::cref(o), _1, _2, _3));
  if (summary->parsed()) return run_per_feed(o, std::bind(cmd_summary, std::cref(o), _1, _2, _3));
  if (ecdf->parsed()) return run_per_feed(o, std::bind(cmd_ecdf, std::cref(o), _1, _2, _3));
  if (hist->parsed()) return run_per_feed(o, std::bind(cmd_hist, std::cref(o), _1, _2, _3));
  if (kde->parsed()) return run_per_feed(o, std::bind(cmd_kde, std::cref(o), _1, _2, _3));
  if (signals->parsed()) {
    ss_signals* set = nullptr;
    if (ss_signals_read(o.signals.c_str(), &set) != SS_OK) {
      std::cerr << "error: " << o.signals << ": " << ss_last_error() << '\n';
      return 1;
    }
    SignalsPtr owned(set);
    return run_per_feed(o, [&](const std::string& path, const LoadsPtr& loads, std::ostream& log) {
      cmd_signals(o, path, loads, set, log);
    });
  }
  if (download->parsed()) return cmd_download(o);
  std::cerr << app.help();
  return 2;
}
