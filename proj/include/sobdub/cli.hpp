#pragma once

// Batch front-end: parses a command line, runs one subcommand and writes a
// JSON or CSV report.
//
// Exit codes: 0 success, 1 a certificate failed, 2 invalid input.

#include <iosfwd>
#include <string>
#include <vector>

namespace sobdub::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCertificate = 1;
inline constexpr int kExitInvalid = 2;

/// `args` excludes the program name. Reports go to `out` unless --out is
/// given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sobdub::cli
