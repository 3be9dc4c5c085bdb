#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pucopula::cli {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitRuntimeError = 1,
  kExitValidationError = 2,
  kExitUsageError = 64,
};

/// Runs the tool on `args` (program name excluded), writing normal output to
/// `out` and diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pucopula::cli
