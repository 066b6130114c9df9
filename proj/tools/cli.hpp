#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jdan::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3 };

//! Runs the command line (args excludes the program name). Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace jdan::cli
