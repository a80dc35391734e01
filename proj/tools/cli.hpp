#pragma once

#include <iosfwd>

namespace treeconv::cli {

enum ExitCode : int { kOk = 0, kSuiteFailure = 1, kInputError = 2, kConvergenceFailure = 3 };

// Runs one subcommand; all output goes to the given streams.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace treeconv::cli
