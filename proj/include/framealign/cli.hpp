#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace framealign {

/// Entry point of the `framealign` command-line tool. Writes a JSON report
/// (resolved config plus result, or an error object) to `out`; usage and
/// help text go to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace framealign
