#pragma once

#include <string>
#include <vector>

namespace cblab {

// Command-line driver (subcommands: mechanism, laplace, simulate, verify).
// Returns the process exit code: 0 success / all checks pass, 1 check
// failures, 2 configuration or usage errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace cblab
