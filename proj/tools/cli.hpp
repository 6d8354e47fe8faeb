#pragma once

#include <string>
#include <vector>

namespace flowlab {

// Entry point shared by the binary and the test suites.
// Exit codes: 0 all checks pass, 1 at least one violation, 2 input,
// configuration or hypothesis error.
int run_cli(const std::vector<std::string>& args);

} // namespace flowlab
