#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace constance::cli {

inline constexpr const char* kSeedEnv = "CONSTANCE_SEED";
inline constexpr const char* kOutEnv = "CONSTANCE_OUT";

// Parses args (args[0] is the program name) and runs one subcommand. Settings
// resolve in order: command-line flag, environment variable, run config,
// built-in default. Returns 0 on success, 1 when a command fails and 2 on a
// usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace constance::cli
