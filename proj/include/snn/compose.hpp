#pragma once

// Parallel composition of networks and output hiding, plus numerical
// verifiers for the factorization identities that make composition
// compositional. Two networks may be composed when neither captures the
// other's internal neurons and their output sets are disjoint; a neuron that
// is an input of one side and an output of the other becomes an output of the
// composite and is driven by the side that owns it.

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "snn/core.hpp"
#include "snn/prob.hpp"

namespace snn {

struct CompatibilityReport {
    bool ok = false;
    std::vector<std::string> reasons; // empty iff ok
};

CompatibilityReport compatible(const Network& a, const Network& b);

// Union construction; throws ModelError (listing the reasons) if the pair is
// incompatible or either side is not well formed.
Network compose(const Network& a, const Network& b);

// True when no output of b feeds an input of a, i.e. information flows only
// from a to b and the composite's behavior factors exactly.
bool is_acyclic_composition(const Network& a, const Network& b);

// Reclassify a set of output neurons as internal (they keep their bias,
// initial state, and edges). hidden must be a subset of the outputs.
Network hide(const Network& net, const std::set<std::string>& hidden);

// The input stream a component sees inside a composition: inputs that are
// composite inputs track beta_in, inputs captured from the other component's
// outputs replay the observed trace prefix (length t-1) and default to 0 from
// time t on. The result materializes times 0..t and extends with zeros, which
// is exact whenever beta_in extends with zeros and exact through time t
// otherwise.
struct ComponentInputSpec {
    int component = 0; // 1 or 2
    InputExecution derived;
    std::map<std::string, std::string> source; // neuron -> "external" | "cross"
};

ComponentInputSpec derive_component_input(const Network& n1, const Network& n2,
                                          const InputExecution& beta_in, const Execution& observed,
                                          int component, int t);

// --- identity verifiers -----------------------------------------------------
//
// Each returns the absolute residual of one factorization identity evaluated
// on concrete data; exact identities should come back at roundoff level.

// Acyclic pairs: P(beta) = P1(beta | N1) * P2(beta | N2), with each component
// run under its derived input stream.
double verify_acyclic_factorization(const Network& n1, const Network& n2,
                                    const EngineParams& params, const InputExecution& beta_in,
                                    const Execution& beta);

// Any compatible pair: the one-step conditional of a composite trace equals
// the product of the components' one-step output conditionals.
double verify_onestep_factorization(const Network& n1, const Network& n2,
                                    const EngineParams& params, const InputExecution& beta_in,
                                    const Execution& beta);

// The four execution/trace variants of the one-step factorization, evaluated
// on a composite execution alpha: numerators over executions or traces,
// conditioning on the one-step execution prefix or its trace.
// [0] P(alpha | alpha'), [1] P(trace(alpha) | alpha'),
// [2] P(alpha | trace(alpha')), [3] P(trace(alpha) | trace(alpha')).
std::array<double, 4> verify_onestep_factorization2(const Network& n1, const Network& n2,
                                                    const EngineParams& params,
                                                    const InputExecution& beta_in,
                                                    const Execution& alpha);

// Conditioned on its trace, a composite execution splits into independent
// component pieces: P(alpha | beta) = prod_j P(alpha|Nj given beta|Nj), all
// under the composite's own distribution.
double verify_execution_independence(const Network& n1, const Network& n2,
                                     const EngineParams& params, const InputExecution& beta_in,
                                     const Execution& alpha);

// Hiding marginalizes: the hidden network's trace probability equals the sum
// of the original network's trace probabilities over all completions of the
// hidden columns.
double verify_hiding(const Network& net, const std::set<std::string>& hidden,
                     const EngineParams& params, const InputExecution& beta_in,
                     const Execution& beta_hidden);

} // namespace snn
