#pragma once

// Command-line entry point: simulate, features, train, eval, interleave,
// abtest, analyze, repro.

#include <iosfwd>
#include <string>
#include <vector>

namespace ltrlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name. Normal output goes to `out`, errors
/// and warnings to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace ltrlab::cli
