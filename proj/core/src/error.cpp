#include "sio/error.hpp"

namespace sio {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parameter: return "parameter";
    case ErrorCode::input: return "input";
    case ErrorCode::schema: return "schema";
    case ErrorCode::io: return "io";
    case ErrorCode::diagonal_singularity: return "diagonal_singularity";
    case ErrorCode::separation: return "separation";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::hypothesis: return "hypothesis";
    case ErrorCode::normalization: return "normalization";
    case ErrorCode::cap_exceeded: return "cap_exceeded";
    case ErrorCode::resolution: return "resolution";
    case ErrorCode::shrink: return "shrink";
    case ErrorCode::unreliable_estimate: return "unreliable_estimate";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::not_sectorializable: return "not_sectorializable";
  }
  return "unknown";
}

}  // namespace sio
