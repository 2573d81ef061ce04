#pragma once

namespace piff {

// Entry point for the `piff` tool. Dispatches one subcommand (compile,
// reduce, mf, fastsim, check, simulate, verify) and returns the process
// exit code: 0 on success, 1 when the input is rejected (diagnostics,
// non-lumpable labellings, numeric failures), 2 on command-line misuse.
int run_cli(int argc, const char* const* argv);

} // namespace piff
