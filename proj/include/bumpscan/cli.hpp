#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bumpscan::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kReject = 3,
  kRuntimeError = 4,
};

/// Runs the command line (args excludes the program name). Output and
/// diagnostics go to the given streams; the return value is the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bumpscan::cli
