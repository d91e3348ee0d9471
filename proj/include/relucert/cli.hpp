#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relucert {

// Full command-line driver behind the relucert binary. args excludes the
// program name. Records go to out, one JSON object per line, in input order;
// diagnostics go to err. Returns the process exit status: 0 for clean runs
// (including not_robust/unknown outcomes), nonzero for I/O, parse or
// validation failures.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace relucert
