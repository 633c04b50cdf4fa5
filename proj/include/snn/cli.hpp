#pragma once

// Command-line front end: build networks from the library's constructions,
// compose and hide them, query exact probabilities, run seeded Monte Carlo
// estimates, verify the engine's exact identities on random instances, and
// check problem conformance. All results are JSON on `out`.

#include <iosfwd>

namespace snn::cli {

// Runs one command. Exit codes: 0 success/verified, 1 usage error, 2 model
// error (malformed input, invariant violation, incompatibility, interface
// mismatch), 3 verification or conformance failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace snn::cli
