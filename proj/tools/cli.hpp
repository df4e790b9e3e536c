#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ibnr::cli {

enum ExitCode : int {
    kSuccess = 0,
    kValidation = 1,
    kNumerical = 2,
};

/// Runs one `ibnr` invocation. `args` excludes the program name. Messages go to `out` and
/// diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ibnr::cli
