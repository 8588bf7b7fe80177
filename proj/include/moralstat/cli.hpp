#pragma once

#include <iosfwd>

namespace moralstat::cli {

// Exit codes: 0 success, 1 usage, 2 data validation, 3 numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace moralstat::cli
