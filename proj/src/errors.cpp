#include "schro/errors.hpp"

namespace schro {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_curve: return "InvalidCurve";
    case ErrorCode::slope_undefined: return "SlopeUndefined";
    case ErrorCode::domain_error: return "DomainError";
    case ErrorCode::flow_diverged: return "FlowDiverged";
    case ErrorCode::grid_mismatch: return "GridMismatch";
    case ErrorCode::endpoint_entropy_infinite: return "EndpointEntropyInfinite";
    case ErrorCode::profile_incomplete: return "ProfileIncomplete";
    case ErrorCode::schedule_rejected: return "ScheduleRejected";
    case ErrorCode::not_applicable: return "NotApplicable";
    case ErrorCode::unsupported: return "Unsupported";
    case ErrorCode::config: return "ConfigError";
    case ErrorCode::io: return "IOError";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace schro
