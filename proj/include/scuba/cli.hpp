#pragma once

#include <iosfwd>

namespace scuba {

inline constexpr int kExitClean = 0;
inline constexpr int kExitBugs = 1;
inline constexpr int kExitFrontend = 2;
inline constexpr int kExitInternal = 3;
inline constexpr int kExitUsage = 64;

/// Entry point of the scuba-mini executable. `analyze` is the default
/// subcommand when the first argument is not a subcommand name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace scuba
