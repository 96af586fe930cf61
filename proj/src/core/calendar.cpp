#include "stopspacing/calendar.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "stopspacing/csv.hpp"
#include "stopspacing/error.hpp"

namespace stopspacing {

ServiceDate::ServiceDate(int year, unsigned month, unsigned day)
    : days_(std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}}) {}

std::optional<ServiceDate> ServiceDate::parse(std::string_view yyyymmdd) {
  yyyymmdd = csv::trim(yyyymmdd);
  if (yyyymmdd.size() != 8) return std::nullopt;
  const auto value = csv::parse_int(yyyymmdd);
  if (!value) return std::nullopt;
  return from_int(static_cast<int>(*value));
}

std::optional<ServiceDate> ServiceDate::from_int(int yyyymmdd) {
  const std::chrono::year_month_day ymd{std::chrono::year{yyyymmdd / 10000},
                                        std::chrono::month{static_cast<unsigned>(yyyymmdd / 100 % 100)},
                                        std::chrono::day{static_cast<unsigned>(yyyymmdd % 100)}};
  if (yyyymmdd <= 0 || !ymd.ok()) return std::nullopt;
  return ServiceDate(std::chrono::sys_days{ymd});
}

int ServiceDate::as_int() const {
  const std::chrono::year_month_day ymd{days_};
  return static_cast<int>(ymd.year()) * 10000 + static_cast<int>(static_cast<unsigned>(ymd.month())) * 100 +
         static_cast<int>(static_cast<unsigned>(ymd.day()));
}

std::string ServiceDate::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08d", as_int());
  return buf;
}

std::string ServiceDate::iso() const {
  const int v = as_int();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", v / 10000, v / 100 % 100, v % 100);
  return buf;
}

unsigned ServiceDate::weekday_index() const {
  return std::chrono::weekday{days_}.iso_encoding() - 1;
}

bool is_bus_route_type(int route_type) {
  return route_type == 3 || (route_type >= 700 && route_type <= 799);
}

std::set<std::string> active_services(const FeedBundle& feed, const ServiceDate& date) {
  std::set<std::string> active;
  std::set<std::string> removed;
  for (const auto& ex : feed.calendar_dates()) {
    if (ex.date != date) continue;
    if (ex.type == ExceptionType::removed) removed.insert(ex.service_id);
  }
  const unsigned weekday = date.weekday_index();
  for (const auto& window : feed.calendar()) {
    if (window.start_date <= date && date <= window.end_date && window.weekdays[weekday] &&
        !removed.contains(window.service_id)) {
      active.insert(window.service_id);
    }
  }
  for (const auto& ex : feed.calendar_dates()) {
    if (ex.date == date && ex.type == ExceptionType::added) active.insert(ex.service_id);
  }
  return active;
}

std::uint64_t trip_departures(const FeedBundle& feed, const Trip& trip) {
  const auto spans = feed.frequencies_for(trip.trip_id);
  if (spans.empty()) return 1;
  std::uint64_t total = 0;
  for (const auto& f : spans) {
    const int window = f.end_time_s - f.start_time_s;
    total += std::max<std::uint64_t>(1, static_cast<std::uint64_t>(window / f.headway_secs));
  }
  return total;
}

std::vector<ServiceDate> service_horizon(const FeedBundle& feed) {
  std::set<ServiceDate> dates;
  if (!feed.calendar().empty()) {
    ServiceDate first = feed.calendar().front().start_date;
    ServiceDate last = feed.calendar().front().end_date;
    for (const auto& w : feed.calendar()) {
      first = std::min(first, w.start_date);
      last = std::max(last, w.end_date);
    }
    const int span = std::min(first.days_until(last), kMaxHorizonDays - 1);
    for (int d = 0; d <= span; ++d) dates.insert(first.plus_days(d));
  }
  for (const auto& ex : feed.calendar_dates()) dates.insert(ex.date);
  if (dates.empty()) return {};
  const ServiceDate limit = dates.begin()->plus_days(kMaxHorizonDays - 1);
  std::vector<ServiceDate> out;
  for (const auto& d : dates) {
    if (d > limit) break;
    out.push_back(d);
  }
  return out;
}

std::vector<DayServiceCount> daily_service_counts(const FeedBundle& feed) {
  // Departures per service_id, counting bus trips only.
  std::unordered_map<std::string, std::uint64_t> departures_by_service;
  for (const auto& trip : feed.trips()) {
    const Route* route = feed.find_route(trip.route_id);
    if (route == nullptr || !is_bus_route_type(route->route_type)) continue;
    departures_by_service[trip.service_id] += trip_departures(feed, trip);
  }
  std::vector<DayServiceCount> out;
  for (const auto& date : service_horizon(feed)) {
    DayServiceCount day;
    day.date = date;
    day.active_service_ids = active_services(feed, date);
    for (const auto& service : day.active_service_ids) {
      if (auto it = departures_by_service.find(service); it != departures_by_service.end()) {
        day.trip_count += it->second;
      }
    }
    out.push_back(std::move(day));
  }
  return out;
}

BusiestDay busiest_day(const FeedBundle& feed) {
  BusiestDay best;
  bool found = false;
  for (const auto& day : daily_service_counts(feed)) {
    if (day.trip_count > best.trip_count) {
      best = {day.date, day.trip_count};
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorCode::no_service_info, "no service date in " + feed.source_name() +
                                                " has any bus trip");
  }
  return best;
}

}  // namespace stopspacing
