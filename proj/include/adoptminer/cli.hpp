#pragma once

#include <iosfwd>

namespace adoptminer {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitVersion = 3;

/// Runs `adoptminer <subcommand> [flags]`; returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adoptminer
