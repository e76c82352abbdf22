#pragma once

#include <iosfwd>

namespace dermrank::cli {

/// Stable process exit codes.
enum ExitStatus : int {
    kSuccess = 0,
    kValidationErrors = 1,
    kUsageOrIo = 2,
    kOracleDisagreement = 3,
};

/// Entry point of the `dermrank` tool: validate | rank | generate | check | serve.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dermrank::cli
