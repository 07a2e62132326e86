#pragma once

#include <iosfwd>

namespace agora::cli {

// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_diff = 1;
inline constexpr int exit_config = 2;
inline constexpr int exit_bind = 3;

// `agora serve ...` / `agora replay ...`. Output goes to `out` and `err`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace agora::cli
