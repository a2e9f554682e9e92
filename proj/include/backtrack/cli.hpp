#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace backtrack::cli {

// Exit codes of every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs the command line `args` (without the program name), e.g.
// {"track", "--synth", "linear_motion", "--out", "results"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace backtrack::cli
