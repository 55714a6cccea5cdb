#pragma once

#include <iosfwd>

namespace uuaudit::cli {

/// Entry point of the `uuaudit` tool. Returns 0 on success, 2 on usage
/// errors and 1 when the data or a library call fails.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uuaudit::cli
