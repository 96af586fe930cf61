#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace stopspacing {

// A GTFS service day. Dates are opaque calendar days; no timezone attached.
class ServiceDate {
 public:
  ServiceDate() = default;
  explicit ServiceDate(std::chrono::sys_days days) : days_(days) {}
  ServiceDate(int year, unsigned month, unsigned day);

  // Parses GTFS YYYYMMDD.
  static std::optional<ServiceDate> parse(std::string_view yyyymmdd);
  static std::optional<ServiceDate> from_int(int yyyymmdd);

  int as_int() const;              // 20240103
  std::string to_string() const;   // "20240103"
  std::string iso() const;         // "2024-01-03"

  // 0 = Monday ... 6 = Sunday.
  unsigned weekday_index() const;

  ServiceDate plus_days(int n) const { return ServiceDate(days_ + std::chrono::days(n)); }
  int days_until(const ServiceDate& other) const {
    return static_cast<int>((other.days_ - days_).count());
  }

  std::chrono::sys_days days() const { return days_; }

  friend auto operator<=>(const ServiceDate&, const ServiceDate&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace stopspacing
