#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace schemagate {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitUsage = 2, kExitStore = 3 };

/// Runs one command line (argv[0] is the program name). Human output goes
/// to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace schemagate
