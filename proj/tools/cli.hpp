#pragma once

#include <string>
#include <vector>

namespace lhc::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalid = 1,
  kFailed = 2,
  kInfeasible = 3,
};

/// Runs one `lhc` subcommand; `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace lhc::cli
