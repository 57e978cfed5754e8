#pragma once

#include <ostream>

namespace proxrec {

/// Entry point of the `proxrec` tool. Returns 0 on success, 1 for usage,
/// validation and cold-user errors, 2 for runtime failures.
///
/// Log verbosity comes from the PROXREC_LOG_LEVEL environment variable
/// (trace, debug, info, warn, error, critical, off; default warn).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace proxrec
