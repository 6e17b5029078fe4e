#pragma once

#include <iosfwd>

namespace cubreg {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitSolver = 2 };

/// Entry point of the command-line tool, with streams injected so tests can
/// drive it in-process. `color` enables ANSI highlighting in text tables; it
/// is still suppressed when NO_COLOR is set or --out redirects output.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, bool color = false);

}  // namespace cubreg
