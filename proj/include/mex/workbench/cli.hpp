#pragma once

#include <iosfwd>

namespace mex::workbench {

// The `mex` command line. Returns 0 on success, 1 for user errors (bad
// arguments, invalid input files, schema mismatches) and 2 for internal
// failures.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace mex::workbench
