#pragma once

#include <string>
#include <vector>

namespace gcl {

// Entry point behind the gcl binary, callable in-process from tests.
// Exit codes: 0 success, 1 usage error, 2 schema error, 3 numeric error.
int run_cli(const std::vector<std::string>& args);

} // namespace gcl
