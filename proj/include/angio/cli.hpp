#pragma once

#include <iosfwd>

namespace angio {

inline constexpr const char* kVersion = "1.0.0";

/// Entry point of the angiolab tool. Returns 0 on success, 1 on a solver
/// failure and 2 on a usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace angio
