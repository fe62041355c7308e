#pragma once

#include <iosfwd>

namespace bdcutoff {

// Command-line entry point. Exit codes: 0 success, 1 usage error, 2 runtime error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace bdcutoff
