#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dissmps::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCap = 3;

// Runs one command. `args` excludes the program name. Results go to the file
// named by --out when given, otherwise to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dissmps::cli
