#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rcgan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitIo = 3;

// Runs one subcommand. `args` excludes the program name. Normal output goes
// to `out`, diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rcgan::cli
