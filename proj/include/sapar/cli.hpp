#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sapar {

/// Exit statuses of the command-line tool.
enum ExitStatus { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

/// Runs the `sapar` command line; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sapar
