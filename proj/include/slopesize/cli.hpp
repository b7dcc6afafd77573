#pragma once

#include <ostream>

namespace slopesize::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kNumerical = 3;

// Environment overrides; command-line flags take precedence.
inline constexpr const char* kSeedEnv = "SLOPESIZE_SEED";
inline constexpr const char* kCacheEnv = "SLOPESIZE_CACHE";

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace slopesize::cli
