#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cxr_audit::cli {

inline constexpr int kExitClean = 0;
inline constexpr int kExitFlagged = 1;
inline constexpr int kExitInputError = 2;

// `args` excludes the program name. Report paths go to `out`, diagnostics
// to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cxr_audit::cli
