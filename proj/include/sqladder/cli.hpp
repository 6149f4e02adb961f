#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sqladder::cli {

// Exit codes: 0 success, 2 invalid input, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

int run(int argc, char** argv, std::ostream& out, std::ostream& err);
// Arguments exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sqladder::cli
