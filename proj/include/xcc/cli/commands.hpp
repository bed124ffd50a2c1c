#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xcc/cli/config.hpp"

namespace xcc::cli {

/// Stable process exit codes.
enum ExitCode : int { kOk = 0, kInputError = 2, kNumericAbort = 3, kCheckpointError = 4, kUnimplemented = 5 };

/// A reserved command or option with no implementation.
class UnimplementedError : public Error {
 public:
    using Error::Error;
};

constexpr const char* kOutRootEnv = "XCC_OUT_ROOT";

/// Output directory: --out, else $XCC_OUT_ROOT/<command>, else xcc_out/<command>.
std::filesystem::path resolve_out(const std::string& flag, const std::string& command);

/// Parses and runs one invocation; returns the exit code. Errors are
/// reported on stderr.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace xcc::cli
