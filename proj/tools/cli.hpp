#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qroof::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCheckFailed = 3;

inline constexpr const char* kToolVersion = "qroof 0.1.0";

/// Runs one command line (without the program name). The ResultFile goes to
/// `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qroof::cli
