#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stopspacing {

enum class ErrorCode {
  invalid_argument,
  io,
  missing_required_file,
  malformed_row,
  no_service_info,
  invalid_range,
  load_map_missing,
  all_excluded,
  zero_total_weight,
  degenerate_data,
  empty_table,
  network_unavailable,
  http_error,
  not_a_zip,
  malformed_catalog,
  malformed_input,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// C API can map it to a status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised for HTTP responses outside 2xx; status() holds the response code.
class HttpError : public Error {
 public:
  HttpError(long status, const std::string& url)
      : Error(ErrorCode::http_error,
              "HTTP " + std::to_string(status) + " for " + url),
        status_(status) {}

  long status() const noexcept { return status_; }

 private:
  long status_;
};

}  // namespace stopspacing
