#pragma once

// Command-line front end: trajectory, sweep and ensemble subcommands.

#include <iosfwd>

namespace pilotwave::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitMismatch = 3;

/// Default output directory when --out is not given.
inline constexpr const char* kOutputDirVariable = "PILOTWAVE_OUTPUT_DIR";
inline constexpr const char* kFallbackOutputDir = "pilotwave-out";

/// Runs the command line; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pilotwave::cli
