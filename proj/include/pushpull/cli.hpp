#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pushpull {

// Exit codes: 0 success, 2 config error, 3 assumption failure,
// 4 numeric failure, 5 I/O error, 1 anything else.
int cli_main(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace pushpull
