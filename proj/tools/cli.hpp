#pragma once

#include <iosfwd>

namespace hsnl::cli {

// Entry point shared by the executable and the tests.
// Exit codes: 0 success, 1 configuration or validation error, 2 numerical nonconvergence.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hsnl::cli
