#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sio {

/// Stable error categories. The CLI maps these onto exit codes and the
/// machine-readable error object, so the enumerator names are part of the
/// external interface.
enum class ErrorCode {
  parameter,
  input,
  schema,
  io,
  diagonal_singularity,
  separation,
  precondition,
  unsupported,
  hypothesis,
  normalization,
  cap_exceeded,
  resolution,
  shrink,
  unreliable_estimate,
  non_convergence,
  not_sectorializable,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::map<std::string, double> data = {})
      : std::runtime_error(message), code_(code), data_(std::move(data)) {}

  ErrorCode code() const noexcept { return code_; }

  /// Numeric context attached by the thrower (residuals, both estimates of
  /// an unreliable grid computation, offending coordinates, ...).
  const std::map<std::string, double>& data() const noexcept { return data_; }

 private:
  ErrorCode code_;
  std::map<std::string, double> data_;
};

}  // namespace sio
