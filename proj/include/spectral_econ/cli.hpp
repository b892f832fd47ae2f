#pragma once

#include "spectral_econ/error.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace spectral_econ::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitPrecondition = 3;
inline constexpr int kExitNumeric = 4;

int exit_code(ErrorCategory category);

/// args excludes the program name. Reports go to --out or `out`;
/// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace spectral_econ::cli
