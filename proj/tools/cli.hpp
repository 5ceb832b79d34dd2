#pragma once

#include <string>
#include <vector>

namespace hiforead::cli {

/// Runs the command line given argv-style arguments (excluding the program
/// name). Exit codes: 0 success, 1 runtime failure, 2 config/validation
/// failure.
int run(const std::vector<std::string>& args);

int run(int argc, char** argv);

} // namespace hiforead::cli
