#pragma once

// Seeded sampling of executions and empirical estimation of trace-event
// probabilities. Every trial draws from its own counter-derived substream of
// the master seed, so results are identical regardless of evaluation order,
// and a fixed (seed, config) pair always reproduces the same numbers.

#include <cstdint>
#include <functional>
#include <utility>

#include "snn/core.hpp"
#include "snn/prob.hpp"

namespace snn {

// Small splittable PRNG (SplitMix64): full 64-bit state, passes standard
// statistical batteries, and cheap enough to seed once per trial.
struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Deterministic stream seed for one trial of a run.
std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t trial);

struct TrialConfig {
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
    double confidence = 0.9999366575163338; // two-sided 4-sigma
};

struct EstimateRecord {
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    double confidence = 0.0;
    std::uint64_t seed = 0;
};

// Two-sided z quantile for the given confidence level in (0,1): the value z
// with P(|Z| <= z) = confidence for standard-normal Z.
double z_for_confidence(double confidence);

// Normal-approximation binomial proportion interval with a +-1/(2n)
// continuity correction, clamped to [0,1].
std::pair<double, double> binomial_ci(std::uint64_t successes, std::uint64_t trials,
                                      double confidence);

// One execution of length `horizon` drawn from the network's dynamics under
// the given input stream: each step draws every output/internal neuron
// independently with its sigmoid firing probability, in canonical neuron
// order. Deterministic in all arguments.
Execution sample_execution(const Network& net, const EngineParams& params,
                           const InputExecution& input, int horizon, std::uint64_t seed);

// Empirical probability that the trace of a sampled length-`horizon`
// execution satisfies the predicate, with a confidence interval.
EstimateRecord estimate_event(const Network& net, const EngineParams& params,
                              const InputExecution& input, int horizon,
                              const std::function<bool(const Execution&)>& predicate,
                              const TrialConfig& cfg);

// Observed frequency of every trace prefix (lengths 0..horizon) over
// cfg.trials sampled executions. Satisfies cone additivity by construction.
BehaviorFingerprint empirical_fingerprint(const Network& net, const EngineParams& params,
                                          const InputExecution& input, int horizon,
                                          const TrialConfig& cfg);

} // namespace snn
