#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rotacalc {

// Runs one command line (without the program name). Results go to `out`,
// diagnostics to `err`. Returns 0 on success, 1 on a domain error, 2 on a
// usage error; no output file is written unless the command succeeds.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rotacalc
