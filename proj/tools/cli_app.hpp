#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nds::cli {

/// Parses and executes one CLI invocation. Returns the process exit status:
/// 0 success, 1 runtime error, 2 usage/config error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace nds::cli
