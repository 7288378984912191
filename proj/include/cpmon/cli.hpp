#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpmon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitExhausted = 3;

/// Entry point of the `cpmon` tool. args excludes the program name.
/// `-` as --input or --output refers to `in` / `out`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace cpmon::cli
