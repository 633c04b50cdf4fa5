#pragma once

// Exact probability engine. Probabilities of finite executions and traces are
// computed by forward filtering over internal configurations, so the cost per
// step is governed by 2^|internal| rather than by the number of executions
// compatible with a trace.

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "snn/core.hpp"

namespace snn {

struct EngineParams {
    double lambda = 1.0;
};

// Cone probabilities P(A(beta)) of every trace up to a horizon, keyed by
// serialized trace. Keys hold one row of '0'/'1' per step over `externals`
// (canonical order), rows joined with ';'. When `empirical` is set the
// entries are observed frequencies from sampling instead of exact values.
struct BehaviorFingerprint {
    std::vector<std::string> externals;
    int horizon = 0;
    double lambda = 1.0;
    InputExecution input;
    bool empirical = false;
    std::map<std::string, double> entries;
};

// One-step conditionals P(A(beta)) / P(A(one-step prefix of beta)), keyed by
// the extension beta. The unique length-0 trace appears with value 1 as the
// base of the chain.
struct ConditionalFingerprint {
    std::vector<std::string> externals;
    int horizon = 0;
    double lambda = 1.0;
    InputExecution input;
    std::map<std::string, double> entries;
};

// Forward-filter state over internal configurations. After a trace prefix of
// length step() has been observed (an initial output pattern plus one output
// pattern per advance), mass(pat) is the probability that an execution
// follows the prefix and has internal values pat at time step(), and total()
// is the cone probability P(A(prefix)) itself. Input values are taken from
// the input stream, so only output observations are fed in.
class TraceDistribution {
public:
    TraceDistribution(const Network& net, const EngineParams& params, InputExecution input,
                      const FiringPattern& output0);
    ~TraceDistribution();
    TraceDistribution(const TraceDistribution&) = delete;
    TraceDistribution& operator=(const TraceDistribution&) = delete;

    int step() const { return step_; }
    double total() const;
    double mass(const FiringPattern& internals) const;
    void advance(const FiringPattern& next_outputs);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int step_ = 0;
};

// --- trace keys -------------------------------------------------------------

std::string trace_key(const Execution& trace);
std::string trace_key_parent(const std::string& key, int n_ext);
int trace_key_length(const std::string& key, int n_ext);
bool trace_key_bit(const std::string& key, int n_ext, int t, int pos);
Execution trace_from_key(const std::string& key, const std::vector<std::string>& externals);

// --- probabilities ----------------------------------------------------------

// Probability of moving from a full configuration (over all neurons) to the
// given values on every output/internal neuron: the product, over those
// neurons, of the firing probability or its complement.
double transition_probability(const Network& net, const EngineParams& params,
                              const FiringPattern& prev, const FiringPattern& next_lc);

// Probability of a finite execution (patterns over all neurons): the product
// of its one-step transition probabilities. Throws ModelError if alpha is
// inconsistent with the input stream or with the stored initial state.
double execution_probability(const Network& net, const EngineParams& params,
                             const InputExecution& input, const Execution& alpha);

// Probability that an execution sampled under `input` matches every given
// per-step constraint (patterns over arbitrary neuron subsets; constraints[t]
// applies at time t). Returns 0 if the constraints are unsatisfiable, e.g.
// they contradict the initial state or the input stream.
double cone_probability(const Network& net, const EngineParams& params, const InputExecution& input,
                        std::span<const FiringPattern> constraints);

// P(A(beta)) for a trace beta (patterns over the external neurons). Throws
// ModelError if beta's input columns contradict the input stream.
double trace_probability(const Network& net, const EngineParams& params,
                         const InputExecution& input, const Execution& beta);

// numerator / denominator with a domain check on the denominator.
double conditional_probability(double numerator, double denominator);

// Sum of P(A(beta)) over all length-`horizon` traces satisfying the
// predicate, which receives each trace as an Execution over the external
// neurons.
double event_probability(const Network& net, const EngineParams& params,
                         const InputExecution& input, int horizon,
                         const std::function<bool(const Execution&)>& predicate);

BehaviorFingerprint behavior(const Network& net, const EngineParams& params,
                             const InputExecution& input, int horizon);

ConditionalFingerprint behavior2(const Network& net, const EngineParams& params,
                                 const InputExecution& input, int horizon);

// Equivalence between the two views: divide along the prefix chain, or
// multiply back down it.
ConditionalFingerprint conditionals_from_behavior(const BehaviorFingerprint& fp);
BehaviorFingerprint behavior_from_conditionals(const ConditionalFingerprint& fp);

// Project every trace onto a subset of the externals, summing entries that
// collide. `keep` must be a subset of fp.externals.
BehaviorFingerprint marginalize(const BehaviorFingerprint& fp, const std::vector<std::string>& keep);

// Largest |a - b| over the union of keys; a missing key counts as 0.
double max_entry_difference(const BehaviorFingerprint& a, const BehaviorFingerprint& b);

std::string fingerprint_to_json(const BehaviorFingerprint& fp, int indent = 2);
std::string fingerprint_to_json(const ConditionalFingerprint& fp, int indent = 2);

} // namespace snn
