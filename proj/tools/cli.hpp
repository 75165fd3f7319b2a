#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pnsr::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Runs one command line (args excludes the program name) and returns the
/// process exit code. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// Names of all subcommands, in help order.
std::vector<std::string> subcommands();

/// The --help text of a subcommand, or of the top-level program for "".
std::string help_text(const std::string& subcommand);

}  // namespace pnsr::cli
