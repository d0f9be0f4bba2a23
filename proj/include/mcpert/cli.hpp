#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mcpert {

/// Exit codes of the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitHypothesisWarning = 1,
  kExitInvalidInput = 2,
  kExitViolation = 3,
};

/// Runs one command line (arguments after the program name) and returns its
/// exit code. Reports go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcpert
