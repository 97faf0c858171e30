#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fans::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitTransport = 3;
inline constexpr int kExitMissingFacets = 4;

/// Runs the command line `args` (program name excluded). Reports go to `out`,
/// diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fans::cli
