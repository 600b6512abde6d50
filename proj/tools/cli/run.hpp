#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sio/error.hpp"

namespace sio::cli {

/// 2 for malformed input, 3 for numerical non-convergence, 1 otherwise.
int exit_code(ErrorCode code);

/// `args` excludes the program name. Reports go to --out or `out`; errors are
/// written to `err` as one JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sio::cli
