#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sio::cli {

using Json = nlohmann::json;

struct Context {
  std::uint64_t seed = 1;
  /// Optional CSV table; first row is the header.
  std::vector<std::vector<std::string>> csv;
  /// Set when a checked property fails; the run exits with status 1.
  bool failed = false;
  /// Second output file of generate-measure for interleaved grids.
  std::optional<std::string> out_nu;
};

/// Fills defaults into `cfg` and returns the result fields of the report.
using Handler = Json (*)(Json& cfg, Context& ctx);

/// nullptr for unknown names.
Handler find_handler(const std::string& command);

const std::vector<std::string>& command_names();

}  // namespace sio::cli
