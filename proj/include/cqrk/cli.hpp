#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cqrk::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kFailure = 2;

/// Runs one command line (without the program name). Subcommands:
/// check-tableau, check-conditions, run, rerun, tables, convergence, info.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cqrk::cli
