#include "stopspacing/error.hpp"

namespace stopspacing {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::io: return "IoError";
    case ErrorCode::missing_required_file: return "MissingRequiredFile";
    case ErrorCode::malformed_row: return "MalformedRow";
    case ErrorCode::no_service_info: return "NoServiceInfo";
    case ErrorCode::invalid_range: return "InvalidRange";
    case ErrorCode::load_map_missing: return "LoadMapMissing";
    case ErrorCode::all_excluded: return "AllExcluded";
    case ErrorCode::zero_total_weight: return "ZeroTotalWeight";
    case ErrorCode::degenerate_data: return "DegenerateData";
    case ErrorCode::empty_table: return "EmptyTable";
    case ErrorCode::network_unavailable: return "NetworkUnavailable";
    case ErrorCode::http_error: return "HttpError";
    case ErrorCode::not_a_zip: return "NotAZip";
    case ErrorCode::malformed_catalog: return "MalformedCatalog";
    case ErrorCode::malformed_input: return "MalformedInput";
  }
  return "Unknown";
}

}  // namespace stopspacing
