#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adaptsde::cli {

enum ExitCode : int { ok = 0, bad_arguments = 2, io_error = 3, malformed_input = 4 };

/// Runs the command line front end; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adaptsde::cli
