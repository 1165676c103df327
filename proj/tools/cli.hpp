#pragma once

#include <ostream>

// aiid command-line front end. Exit codes:
//   0 success, 1 usage, 2 input/parse, 3 service rejection or unreachable,
//   4 verification failure or drift.
namespace aiid::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInput = 2,
  kService = 3,
  kVerification = 4,
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aiid::cli
