#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace isotree {

// Exit codes of the isotree command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;      // unreadable or malformed input, bad flags
inline constexpr int kExitInvariant = 3;  // invalid instance, failed certificate, internal check
inline constexpr int kExitMismatch = 4;   // solver and oracle disagree
inline constexpr int kExitOracleCap = 5;  // instance too large for the oracle

/// Runs the command line `args` (without the program name), writing results
/// to `out` and diagnostics to `err`. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace isotree
