#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bsafe::cli {

inline constexpr const char* kVersion = "0.1.0";

// Runs one command line (without the program name). Returns the process exit
// code: 0 success, 2 usage error, 3 data or validation error, 4 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bsafe::cli
