#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssmkit::cli {

/// Exit codes of the ssmkit tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitInfeasible = 3;

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssmkit::cli
