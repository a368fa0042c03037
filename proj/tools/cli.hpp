#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace facesynth::cli {

inline constexpr const char* version = "1.0.0";

enum ExitCode : int { success = 0, input_error = 1, internal_failure = 2 };

/// Runs one command line (args excludes the program name). Results go to
/// `out`, diagnostics to `err`; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace facesynth::cli
