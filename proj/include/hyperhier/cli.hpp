#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace hyperhier {

// Entry point behind the command-line binary, callable in-process from tests.
// Returns the process exit code; never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace hyperhier
