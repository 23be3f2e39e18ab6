#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hgm {

/// Exit statuses of the command line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverError = 1;
inline constexpr int kExitUsage = 2;

/// Runs the hgm_ball command line. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hgm
