#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace schro {

enum class ErrorCode {
  invalid_curve,
  slope_undefined,
  domain_error,
  flow_diverged,
  grid_mismatch,
  endpoint_entropy_infinite,
  profile_incomplete,
  schedule_rejected,
  not_applicable,
  unsupported,
  config,
  io,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace schro
