#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cohexp::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,  // runtime failure such as training divergence
  kInputError = 2,
  kContractError = 3,
};

/// Runs one command line. `args` excludes the program name. Errors print a
/// single line "<CODE>: <message>" to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cohexp::cli
