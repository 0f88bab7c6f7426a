#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iomlab::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitSolver = 4;

/// Runs one command line (args[0] is the program name). Reports go to
/// `out`; diagnostics and the JSON error line go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iomlab::cli
