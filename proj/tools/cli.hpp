#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dot::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationFailure = 1;
inline constexpr int kPartialFailure = 2;
inline constexpr int kUsage = 64;  // sysexits EX_USAGE

/// Runs one subcommand. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dot::cli
