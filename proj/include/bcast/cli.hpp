#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bcast {

enum exit_code : int { exit_ok = 0, exit_failure = 1, exit_usage = 2, exit_guard = 3, exit_infeasible = 4 };

/// Runs the command line tool with args excluding the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bcast
