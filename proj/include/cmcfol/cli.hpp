#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cmcfol {

// Runs the command-line interface. Returns the process exit code:
//   0 success, 1 domain/precondition error, 2 usage error.
// Errors are emitted to `out` as a single-line JSON object with an "error"
// field so that callers can parse failures mechanically.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace cmcfol
