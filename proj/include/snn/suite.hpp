#pragma once

// Randomized cross-validation suites. Each suite generates small random
// networks (or pairs with cross wiring), evaluates one of the engine's exact
// identities on every instance — factorization under composition, execution
// independence, hiding as marginalization, equivalence of the two behavior
// views — and reports the worst absolute residual seen. The generators are
// deterministic in the seed so failures reproduce and external oracles can
// regenerate the same instances.

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "snn/core.hpp"
#include "snn/prob.hpp"

namespace snn {

struct SuiteReport {
    int cases = 0;
    double max_residual = 0.0;
    std::string worst_case; // which instance produced max_residual
};

// Random network with at most `max_neurons` neurons (at least one output),
// random edges (density 1/2, weights in [-3,3] bounded away from 0), biases
// in [-2,2], random initial values.
Network random_network(std::uint64_t seed, int max_neurons = 4, int max_outputs = 2);

// Compatible pair with shared and cross-wired names: inputs may read the
// other network's outputs and a common external input. At most 3 neurons and
// 2 outputs per side. With `acyclic`, the first network never reads the
// second's outputs, making the composition acyclic.
std::pair<Network, Network> random_pair(std::uint64_t seed, bool acyclic);

// Random input stream for the network: horizon+1 random rows, then zeros.
InputExecution random_input(std::uint64_t seed, const Network& net, int horizon);

// Random trace over the externals that survive hiding `hidden`: input columns
// follow the stream, the first row matches the initial state (so the trace
// has positive probability paths), later output rows are random.
Execution random_hidden_trace(std::uint64_t seed, const Network& net,
                              const std::set<std::string>& hidden, const InputExecution& beta_in,
                              int horizon);

// Full-trace factorization on acyclic compositions: for every trace of the
// composite up to the horizon, |P(beta) - P1(beta|ext1) * P2(beta|ext2)|,
// with each component driven by the input stream it sees in the composition.
SuiteReport acyclic_factorization_suite(int pairs, int horizon, std::uint64_t seed);

// One-step trace factorization (holds for cyclic wiring too), on sampled
// traces of random pairs, half of them cyclic.
SuiteReport onestep_factorization_suite(int pairs, int horizon, std::uint64_t seed);

// The four one-step conditional identities relating executions and traces of
// a composition, on sampled executions of random pairs.
SuiteReport onestep_identities_suite(int pairs, int horizon, std::uint64_t seed);

// Execution-level independence: the composite conditional of a full
// execution given its trace equals the product of the component conditionals.
SuiteReport independence_suite(int composites, int horizon, std::uint64_t seed);

// Hiding as marginalization: trace probabilities after hiding a random
// output subset equal sums over the hidden columns before hiding.
SuiteReport hiding_suite(int cases, int horizon, std::uint64_t seed, int max_neurons = 4);

// Equivalence of cone probabilities and one-step conditionals: both
// round-trip conversions reproduce their source within roundoff.
SuiteReport equivalence_suite(int nets, int horizon, std::uint64_t seed, int max_neurons = 4);

} // namespace snn
