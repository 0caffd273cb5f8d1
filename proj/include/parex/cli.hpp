#pragma once

#include <string>
#include <vector>

namespace parex {

/// Entry point behind the `parex` binary. Exit codes: 0 success, 1 input or
/// I/O error, 2 plan-validity failure.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace parex
