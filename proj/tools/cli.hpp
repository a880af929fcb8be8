#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mimic::cli {

enum ExitCode : int { ok = 0, usage = 1, data = 2, pipeline = 3 };

/// Runs one `mimic` command. args excludes the program name. Diagnostics go
/// to err as a single line; JSON printed by `evaluate` without --out-dir
/// goes to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace mimic::cli
