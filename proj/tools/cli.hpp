#pragma once

#include <ostream>

namespace slit::cli {

/// Exit codes: 0 success, 1 validation failure or failed check, 2 solver
/// non-convergence, 64 usage error, 65 malformed input CSV.
enum ExitCode : int { ok = 0, failed = 1, no_convergence = 2, usage = 64, bad_data = 65 };

/// Runs one subcommand. Reports go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace slit::cli
