#pragma once

#include <iosfwd>

namespace pidlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;  // bad flags, malformed config or inputs
inline constexpr int kExitIo = 3;     // unreadable input, unwritable output

/// Entry point of the `pidlab` tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pidlab::cli
