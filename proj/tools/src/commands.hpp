#pragma once

#include <ostream>

namespace sacl::cli {

// Exit codes: 0 success, 1 a subcommand assertion failed, 2 usage or
// configuration error, 3 runtime error (I/O, protocol, numerics).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sacl::cli
