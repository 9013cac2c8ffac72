#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tdw {

enum ExitCode : int { kExitOk = 0, kExitInputError = 1, kExitConstraintFailure = 2 };

// Runs the `tendonws` command line in-process. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tdw
