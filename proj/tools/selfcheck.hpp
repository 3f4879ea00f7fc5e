#pragma once

#include <iosfwd>

namespace mcpr::cli {

// Runs the built-in oracle suites (dense SVD vs implicit operator, grid
// search vs the MLE solver, brute-force metric enumeration, closed-form
// spectrum and angle checks) and prints one table row per check.
// Returns the number of failing checks.
int run_selfcheck(std::ostream& os);

}  // namespace mcpr::cli
