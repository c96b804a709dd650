#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fmlat::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,       // unexpected internal error
  kPrecondition = 2,  // bad input, usage, parse, overflow or unsupported class
  kInconclusive = 3,  // a search cap was reached
};

/// Runs the fmlat command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fmlat::cli
