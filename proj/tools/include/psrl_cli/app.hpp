#pragma once

#include <ostream>

namespace psrl::cli {

/// Full command-line entry point. Returns the process exit code; messages go
/// to `out`, errors to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace psrl::cli
