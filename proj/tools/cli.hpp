#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spikekern {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitValidation = 2,
    kExitCheckFailed = 3,
};

/// Runs the tool. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spikekern
