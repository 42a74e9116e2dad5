#pragma once

#include <string>
#include <vector>

namespace mdopt {

/// Runs one CLI invocation. `args` excludes the program name.
/// Exit codes: 0 success, 1 numeric failure, 2 usage or configuration error.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace mdopt
