#pragma once

#include <iosfwd>

namespace permacheck {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    exit_holds = 0,
    exit_fails = 1,
    exit_usage = 2,
    exit_numeric = 3,
    exit_inconclusive = 4,
};

/// Parses argv, runs one subcommand and writes the report to `out` (or to the
/// --report/--out path). Errors go to `err` as {"error": {"kind", "message"}}.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace permacheck
