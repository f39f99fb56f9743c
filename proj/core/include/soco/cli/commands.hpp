#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace soco::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitConfig = 2,
  kExitMissingArtifact = 3,
};

// Runs one pipeline stage. `args` excludes the program name. Results go to
// `out` as one JSON line; failures print one JSON line
// {"error": kind, "message": text, "exit": code} to `err`.
//
// Subcommands: train-solo, collect-demos, train-bc, train-marl, eval,
// demo-stats. Every subcommand accepts --config; command-line flags override
// the file.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, const char* const* argv);

}  // namespace soco::cli
