#pragma once

#include <iosfwd>

namespace delaystab {

// Run the ten acceptance checks, print one pass/fail line each, and return
// the number of failures. seed = 0 keeps the pinned seeds of the randomized
// suites; any other value re-seeds them for an independent draw.
int run_acceptance(std::ostream& os, int jobs = 0, unsigned long long seed = 0);

}  // namespace delaystab
