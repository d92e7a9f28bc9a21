#pragma once

#include <iosfwd>

namespace ggrf {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitInput = 2,
    kExitDegenerate = 3,
};

/// Entry point behind the `ggrf` binary: subcommands test, simulate,
/// weights and mixture. Result files go to --out (stdout when "-").
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ggrf
