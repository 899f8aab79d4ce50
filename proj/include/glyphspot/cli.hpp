#pragma once

#include <string>
#include <vector>

namespace glyphspot::cli {

inline constexpr const char* kVersion = "0.1.0";

// Runs one CLI invocation (args exclude the program name). Exit codes:
// 0 success, 1 usage error, 2 data error, 3 I/O error.
int run(const std::vector<std::string>& args);

}  // namespace glyphspot::cli
