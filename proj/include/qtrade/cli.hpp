#pragma once

namespace qtrade {

enum ExitCode : int {
  kExitOk = 0,
  kExitViolation = 1,
  kExitInputError = 2,
  kExitNumericalFailure = 3,
};

/// Entry point of the `qtrade` binary. Subcommands: compute, verify, scan,
/// gen-corpus. Diagnostics go to standard error.
int run_cli(int argc, const char* const* argv);

}  // namespace qtrade
