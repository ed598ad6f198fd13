#pragma once

#include <ostream>

namespace attn::cli {

// Runtime failures outside configuration share code 1 with failed verification.
enum ExitCode { kOk = 0, kVerificationFailed = 1, kRuntimeFailure = 1, kConfigError = 2 };

// Entry point shared by the binary and the CLI tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace attn::cli
