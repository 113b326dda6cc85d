#pragma once

#include <string>
#include <vector>

namespace hpdet::cli {

/// Runs one CLI command. Exit codes: 0 ok, 2 usage error, 3 data or module
/// error, 4 no bandwidth passed the coverage test under --strict-pass.
int run(const std::vector<std::string>& args);

int run(int argc, const char* const* argv);

}  // namespace hpdet::cli
