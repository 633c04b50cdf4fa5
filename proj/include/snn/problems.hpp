#pragma once

// Problems as acceptance conditions on finite-horizon trace distributions.
// A problem names an interface (disjoint input/output neuron sets) and
// decides, for a network's computed result on one input stream, whether that
// result is allowed. Problems compose (outputs must be disjoint; acceptance
// follows the recursive one-step product construction) and hide (outputs are
// marginalized away).
//
// A problem's full set of allowed trace distributions is not finitely
// representable, so problems are carried intensionally:
//   - an acceptance predicate over finite-horizon results, and
//   - optionally, for problems that pin down the whole distribution, a
//     generator producing the canonical fingerprint (these "singleton"
//     problems make composed acceptance directly testable), and
//   - optionally a hiding restatement for named problems whose predicate can
//     be re-expressed on the marginal.

#include <functional>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "snn/core.hpp"
#include "snn/montecarlo.hpp"
#include "snn/prob.hpp"

namespace snn {

// A network's finite-horizon answer on one input stream: the exact or
// empirical cone probability of every trace up to the horizon.
struct Result {
    InputExecution input;
    BehaviorFingerprint dist;
};

// Margin data for one judged input stream. `achieved` and `required` carry
// the decisive quantity when the acceptance reduces to a single comparison
// (event mass vs bound, fingerprint difference vs tolerance); the comparison
// direction is spelled out in `note`. NaN when not applicable.
struct AcceptanceRecord {
    InputExecution input;
    bool pass = false;
    double achieved = std::numeric_limits<double>::quiet_NaN();
    double required = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

struct Problem {
    std::string name;
    std::vector<std::string> n_in; // sorted, disjoint from n_out
    std::vector<std::string> n_out; // sorted
    int min_horizon = 1; // shortest horizon the acceptance can judge

    // Acceptance over results whose fingerprint covers at least n_in ∪ n_out;
    // predicates locate their own columns by name, so composition can hand
    // the composite's full result to each component. Fills the record's
    // margin fields; the bool result is the decision.
    std::function<bool(const Result&, AcceptanceRecord&)> accept;

    // Canonical fingerprint for singleton problems; null for problems that
    // allow many distributions.
    std::function<BehaviorFingerprint(const InputExecution&, int horizon)> generator;

    // Hiding restatement hook consulted by problem_hide for predicate-based
    // problems; null when no restatement is known.
    std::function<Problem(const Problem&, const std::set<std::string>&)> hide_impl;
};

struct Verdict {
    bool solved = false;
    std::vector<AcceptanceRecord> records;
};

enum class SolveMode { Exact, MonteCarlo };

// Computes the network's result for every input stream (exact behavior or an
// empirical fingerprint per cfg) and applies the problem's acceptance.
// Throws ModelError if the network's input/output names differ from the
// problem's interface, or if horizon < prob.min_horizon.
Verdict solves(const Network& net, const EngineParams& params, const Problem& prob,
               const std::vector<InputExecution>& inputs, int horizon, SolveMode mode,
               const TrialConfig& cfg = {});

// Singleton problem whose only allowed behavior is that of the given
// network: the generator evaluates the network's exact behavior and the
// acceptance compares fingerprints entry by entry (tolerance 1e-9).
Problem exact_behavior_problem(std::string name, Network net, const EngineParams& params);

// One-step copy: interface {x} -> {y}; every conditional probability that y
// at time t equals x at time t-1 must be at least 1-delta.
Problem copy_problem(double delta);

// Problem that accepts every result over the given interface.
Problem trivial_problem(std::vector<std::string> n_in, std::vector<std::string> n_out);

// Composition of problems with disjoint output sets. Interface: outputs are
// united, inputs are united minus captured outputs. If both operands carry
// generators, the composed problem is again a singleton whose generator
// follows the recursive construction (base: probability 1 on the combined
// initial outputs; step: product of the two component one-step output
// conditionals under derived component inputs) and acceptance compares
// fingerprints. Otherwise acceptance requires both component predicates to
// accept the result, and, for exact results, the one-step factorization
// residual |P(β|β') - T̂¹·T̂²| to stay below 1e-9, where T̂ʲ is the marginal
// conditional of component j's outputs given the full prefix.
Problem problem_compose(const Problem& r1, const Problem& r2);

// Hiding: drops `hidden` from the outputs. Singleton problems marginalize
// their generator; predicate problems defer to their restatement hook.
Problem problem_hide(const Problem& r, const std::set<std::string>& hidden);

// Winner-take-all problem WTA(n, delta, t_c, t_s): interface x1..xn ->
// y1..yn. For stable input streams with at least one firing neuron the
// result must put mass >= 1-delta on traces where, for some t <= t_c and
// some i with x_i firing, exactly y_i fires from time t through t+t_s-1.
// Other input streams are unconstrained.
Problem wta_problem(int n, double delta, int t_c, int t_s);

// Filter problem Filter(n, delta): interface w1..wn,y1..yn -> z1..zn. Every
// one-step conditional of the correct output row — z_i equal to (w_i and
// y_i) of the previous step for all i — must be at least (1-delta)^n.
Problem filter_problem(int n, double delta);

// Attention(n, delta, t_c, t_s) = compose(WTA(n, delta1, t_c, t_s),
// Filter(n, delta2)) where split = (delta1, delta2) must satisfy
// (1-delta) = (1-delta1)·(1-delta2)^t_s within 1e-12. Supports hiding of
// exactly {y1..yn}, restated as: mass >= 1-delta on traces where, for some
// t <= t_c and firing input i, z_i mirrors w_i and every other z stays
// silent at times t+1..t+t_s.
Problem attention_problem(int n, double delta, int t_c, int t_s,
                          std::pair<double, double> split);

} // namespace snn
