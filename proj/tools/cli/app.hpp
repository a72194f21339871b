#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace topomap::cli {

/// Runs the command line (args[0] is the program name). Returns the process
/// exit code: 0 success, 1 pipeline error, 2 I/O or config error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace topomap::cli
