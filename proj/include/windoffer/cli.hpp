#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace windoffer::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,  // configuration or validation failure
  kSolverRefusal = 3,
  kMissingData = 4,
};

// Runs one invocation. args excludes the program name, e.g.
// {"solve", "--config", "run.json", "--threads", "4"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace windoffer::cli
