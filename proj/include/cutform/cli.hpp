#pragma once

// Batch entry points: verify, hessian-check, isovol, reinit, evolve, optimize.

#include <string>
#include <vector>

namespace cutform {

enum ExitCode : int { Success = 0, ToleranceBreach = 2, ConfigurationError = 3, NumericalError = 4 };

/// Runs one subcommand; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace cutform
