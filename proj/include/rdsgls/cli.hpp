#pragma once

#include <iosfwd>

namespace rdsgls {

/// Runs one subcommand. Returns 0 on success, 1 on a usage error and 2 on
/// a runtime error. Warnings and errors go to `err`, one line each.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rdsgls
