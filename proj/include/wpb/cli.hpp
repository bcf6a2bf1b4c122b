#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace wpb::cli {

/// Entry point shared by the binary and the tests. args excludes the program
/// name. Returns 0 on success, 1 on configuration/usage errors, 2 on numeric
/// failures.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

}  // namespace wpb::cli
