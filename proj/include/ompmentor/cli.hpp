#pragma once

#include <iosfwd>

namespace ompmentor::cli {

/// Exit codes: 0 success, 1 failed validation/eval or runtime error, 2 usage error.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace ompmentor::cli
