#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mohin::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kParse = 3,
  kTraining = 4,
  kInternal = 5,
};

// Runs the command line `args` (args[0] is the program name) and returns the
// exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mohin::cli
