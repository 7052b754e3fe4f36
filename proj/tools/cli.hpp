#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace critfield::cli {

// Usage and config errors share the validation code.
enum Exit { Ok = 0, Validation = 2, Numerical = 3 };

// argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace critfield::cli
