#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcensus::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kBudget = 2, kVerification = 3 };

/// Runs the massey-census command line; args excludes the program name.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace mcensus::cli
