#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace svint {

// Full driver: subcommands simulate, convergence, temperature, invariants,
// list-models. Returns a process exit code; diagnostics go to err.
int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

} // namespace svint
