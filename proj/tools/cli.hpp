#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace udsub::cli {

/// Runs one command line (without the program name). Reports and data go to
/// `out`; errors and warnings go to `err` as single JSON lines.
/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace udsub::cli
