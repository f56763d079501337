#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace coex::cli {

// Exit codes: 0 success / all checks pass, 1 domain failure (derivation,
// verification, expectation), 2 usage or I/O error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coex::cli
