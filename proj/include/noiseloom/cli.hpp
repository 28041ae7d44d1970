#pragma once

#include <iosfwd>

namespace noiseloom {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEngine = 1;
inline constexpr int kExitUsage = 2;

// Subcommands gen, repaint, layout, bench, serve. Diagnostics go to `err`
// as a single line.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace noiseloom
