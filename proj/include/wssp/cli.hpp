#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace wssp {

// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2 };

// Entry point behind the `wssp` executable. `args` excludes the program name.
// Normal output goes to `out`, diagnostics to `err`; files named by --out are
// only written once the command has succeeded.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace wssp
