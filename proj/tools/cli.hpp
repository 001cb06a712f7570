#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mlc::cli {

// Runs the command line tool in-process. `args` excludes the program name.
// Returns the process exit code; all output goes to the supplied streams.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlc::cli
