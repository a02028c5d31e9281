#pragma once

#include <iosfwd>

namespace dcm {

// Exit codes: 0 success, 1 a check failed, 2 bad input or usage.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dcm
