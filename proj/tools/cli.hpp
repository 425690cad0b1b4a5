#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tempoframe::cli {

/// Runs the command line `args` (without the program name). Exit codes:
/// 0 success, 1 validation or run failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tempoframe::cli
