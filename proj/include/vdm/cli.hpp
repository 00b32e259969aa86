#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vdm {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitUsage = 2,
  kExitResource = 3,
  kExitVerdictFail = 4,
};

/// Environment variable naming the Lambda cache file when --cache-path is absent.
inline constexpr const char* kCacheEnvVar = "VDM_CACHE_PATH";

/// Runs the tool on `args` (without the program name) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vdm
