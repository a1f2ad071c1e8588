#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace clsim::cli {

inline constexpr const char* kVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitBoundary = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitVerifyFailed = 5;

/// Runs one command line (without the program name) and returns the exit
/// code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clsim::cli
