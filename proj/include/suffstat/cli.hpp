#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace suffstat {

// Runs one command ("delta", "repro", "check", "coarsen", "identities",
// "distance") against the given argument list, writing the JSON report to
// `out` and machine-readable diagnostics to `err`.
// Exit codes: 0 success, 1 validation/domain error, 2 internal numeric
// failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace suffstat
