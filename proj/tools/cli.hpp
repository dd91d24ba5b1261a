#pragma once

#include <ostream>

#include "fdid/error.hpp"

namespace fdid::cli {

// 0 success, 2 usage or configuration, 3 data, 4 numerical failure.
int exit_code(ErrorKind k) noexcept;

// Runs one `fdid` invocation. Failures print a JSON error object to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fdid::cli
