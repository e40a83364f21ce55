#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace closure {

/// Entry point behind the closure-forge binary. Subcommands: perturb,
/// collect, train, predict, eval, verify. Returns the process exit code:
/// 0 ok, 1 internal error, 2 usage error, 3 family error ("no changes"),
/// 4 validity failure. Errors go to `err` as one-line JSON.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace closure
