/// @file cli.hpp
/// @brief The `iotforge` command line: compile, map, link, simulate, metrics,
/// corpus.
///
/// Exit codes: 0 ok, 1 diagnostics, 2 I/O failure, 3 runtime failure,
/// 64 usage error. Settings resolve as flags, then IOTFORGE_* environment
/// variables, then the project's iotforge.toml.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace iotforge {

enum ExitCode : int {
    kExitOk = 0,
    kExitDiagnostics = 1,
    kExitIo = 2,
    kExitRuntime = 3,
    kExitUsage = 64,
};

/// `args[0]` is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iotforge
