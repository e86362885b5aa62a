#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cvf {

inline constexpr const char* kToolVersion = "0.1.0";

// Runs one subcommand; args[0] is the program name. Errors are reported on
// `err` as a single "error[<kind>]: <message>" line. Exit codes: 0 success,
// 2 usage or validation error, 1 any other failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvf
