#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "stopspacing/feed.hpp"
#include "stopspacing/service_date.hpp"

namespace stopspacing {

// Longest span of days considered when looking for the busiest day.
inline constexpr int kMaxHorizonDays = 370;

// GTFS route_type 3 and the extended bus codes 700-799.
bool is_bus_route_type(int route_type);

// Services running on `date`: calendar rows covering the date with that
// weekday set and no removal exception, plus services added on that date.
std::set<std::string> active_services(const FeedBundle& feed, const ServiceDate& date);

// Departures a trip makes per service day. A trip without frequencies rows
// departs once; each frequencies row contributes
// max(1, floor((end_time - start_time) / headway_secs)).
std::uint64_t trip_departures(const FeedBundle& feed, const Trip& trip);

// Dates examined for the busiest day: every day from the earliest calendar
// start_date to the latest end_date together with every calendar_dates
// date, truncated to kMaxHorizonDays days from the earliest one.
std::vector<ServiceDate> service_horizon(const FeedBundle& feed);

struct DayServiceCount {
  ServiceDate date;
  std::set<std::string> active_service_ids;
  std::uint64_t trip_count = 0;  // frequency-expanded bus departures
};

std::vector<DayServiceCount> daily_service_counts(const FeedBundle& feed);

struct BusiestDay {
  ServiceDate date;
  std::uint64_t trip_count = 0;
};

// Horizon date with the most frequency-expanded bus trip departures; ties go
// to the earliest date. Throws Error(no_service_info) when no date has a
// bus trip.
BusiestDay busiest_day(const FeedBundle& feed);

}  // namespace stopspacing
