#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spvote::cli {

// Runs one subcommand; args excludes the program name. Returns the process
// exit code: 0 success, 1 validation or usage error, 2 runtime error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spvote::cli
