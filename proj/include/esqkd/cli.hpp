#pragma once

#include <ostream>

namespace esqkd {

// Exit codes: 0 success, 1 reproduction mismatch or failed derivation,
// 2 invalid arguments.
inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;
inline constexpr int kExitUsage = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace esqkd
