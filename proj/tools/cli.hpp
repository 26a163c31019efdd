#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace driftwatch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitBackend = 3;

inline constexpr const char* kEnvPrefix = "DRIFTWATCH_";

/// Runs one command line (without the program name). Settings resolve as
/// flags over DRIFTWATCH_* environment variables over the --config JSON file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace driftwatch::cli
