#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mlfe::cli {

/// Process exit statuses.
enum ExitCode : int {
    kOk = 0,
    kIoFailure = 1,      // unreadable or unwritable files, failed bench runs
    kBadArguments = 2,   // parse errors and invalid values
    kPrecondition = 3,   // image too small for the method
};

/// Runs the `mlfe` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlfe::cli
