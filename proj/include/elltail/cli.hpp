#pragma once

#include <iosfwd>

namespace elltail::cli {

// Runs one subcommand. Output marked `-` goes to `out`; diagnostics to `err`.
// Returns 0 on success, 2 on any usage or domain error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace elltail::cli
