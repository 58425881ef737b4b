#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cnf::cli {

enum ExitCode : int { exit_ok = 0, exit_solver_failure = 2, exit_config_error = 3 };

/// Runs one invocation. `args` excludes the program name. `tty` selects the
/// default output format (table on a terminal, jsonl otherwise).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool tty = false);

}  // namespace cnf::cli
