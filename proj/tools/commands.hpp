#pragma once

#include <iosfwd>

namespace pmle::cli {

/// Exit codes: 0 success, 1 invalid usage, 2 runtime failure, 3 no ratified MLE.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pmle::cli
