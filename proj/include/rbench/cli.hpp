#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rbench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitRegression = 2;

// Entry point of the rbench tool. args[0] is the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rbench
