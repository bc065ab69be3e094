#pragma once

namespace r2csl::cli {

/// Entry point behind the command-line tool; returns the process exit code.
int dispatch(int argc, const char* const* argv);

}  // namespace r2csl::cli
