#pragma once

// Internal machinery shared by the probability engine, the randomized
// verification suites, and the Monte Carlo sampler. A network is compiled to
// bitmask form: neuron i (canonical order) is bit i of a configuration word.
// Locally-controlled (lc) neurons additionally get their own bit order with
// internal neurons in the low bits and outputs above them; a product table
// over all lc firing patterns is then laid out output-pattern-major with the
// internal pattern in the low bits, so the mass block of one observed output
// pattern is a contiguous slice.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "snn/core.hpp"
#include "snn/kernels.hpp"

namespace snn::detail {

inline constexpr int kMaxNeurons = 25;
inline constexpr int kMaxFreeBits = 22; // cap on filter state size (2^free doubles)
inline constexpr int kProbCacheBits = 16; // cache per-config probabilities up to 2^16 configs

struct Compiled {
    const Network* net = nullptr;
    double lambda = 1.0;
    int n = 0;
    int n_in = 0, n_out = 0, n_int = 0, n_lc = 0, n_ext = 0;
    std::vector<int> lc_neuron; // lc pos -> neuron index; internals first, then outputs
    std::vector<int> lc_pos; // neuron index -> lc pos, or -1
    std::vector<int> input_neuron; // input pos (canonical) -> neuron index
    std::vector<int> ext_neuron; // external pos (canonical) -> neuron index
    struct In {
        int src;
        double weight;
    };
    std::vector<std::vector<In>> in_edges; // per lc pos
    std::vector<double> bias; // per lc pos
    std::uint32_t f0 = 0; // initial lc values, lc-bit order

    mutable std::vector<double> ptab; // lazily filled: [cfg * n_lc + k]
    mutable std::vector<std::uint8_t> pfill;
    mutable std::vector<double> pscratch;

    // Firing probabilities of every lc neuron given the previous full
    // configuration (neuron-bit mask). The pointer stays valid until the next
    // uncached call on this Compiled.
    const double* probs(std::uint32_t cfg) const;

    std::uint32_t lc_to_neuron_mask(std::uint32_t lc_cfg) const {
        std::uint32_t m = 0;
        for (int k = 0; k < n_lc; ++k)
            if (lc_cfg >> k & 1u)
                m |= 1u << lc_neuron[k];
        return m;
    }
};

// Validates the network (throws ModelError listing the violations) and
// compiles it. lambda must be positive.
Compiled compile(const Network& net, double lambda);

// Throws unless the input execution covers exactly the network's inputs.
void check_input_domain(const Network& net, const InputExecution& input);

// Input row at time t as a neuron-bit mask.
std::uint32_t input_bits(const Compiled& c, const InputExecution& input, int t);

// ---------------------------------------------------------------------------
// Trace filter: forward filtering over internal configurations while the
// external neurons follow an observed trace.

struct TraceFilter {
    std::vector<double> mass; // size 2^n_int, indexed by internal lc bits
    bool dead = false;

    double total() const { return dead ? 0.0 : kernels::active().sum(mass.data(), mass.size()); }
};

// Filter at time 0 for an observed initial output pattern (out-bit order,
// i.e. lc bits shifted down by n_int). Dead if it contradicts the stored
// initial state.
TraceFilter trace_start(const Compiled& c, std::uint32_t out0);

// One step for every possible next output pattern at once. fixed_now holds
// the neuron-bit values of all inputs and outputs at the current step.
// children is resized to 2^n_lc; the block [o << n_int, (o+1) << n_int) is the
// next mass vector after observing output pattern o.
void trace_children(const Compiled& c, const TraceFilter& f, std::uint32_t fixed_now,
                    std::vector<double>& children);

// Collapse to the block of one observed output pattern.
void trace_select(const Compiled& c, const std::vector<double>& children, std::uint32_t out_pattern,
                  TraceFilter& into);

// ---------------------------------------------------------------------------
// General cone filter: per-step constraints over arbitrary lc subsets, with
// every unconstrained lc neuron marginalized. Input-neuron consistency is the
// caller's job (a mismatch means the cone has probability 0).

struct StepConstraint {
    std::uint32_t mask = 0; // lc bits constrained at this step
    std::uint32_t values = 0;
};

class ConeFilter {
public:
    ConeFilter(const Compiled& c, const InputExecution& input);

    void reset(StepConstraint c0); // time 0; dead if it contradicts the initial state
    void advance(StepConstraint next);
    double total() const;
    int step() const { return step_; }
    bool dead() const { return dead_; }

private:
    const Compiled* c_;
    const InputExecution* input_;
    int step_ = 0;
    bool dead_ = true;
    StepConstraint now_;
    std::vector<int> free_bits_; // unconstrained lc positions at the current step
    std::vector<double> mass_; // size 2^free_bits
    std::vector<double> probbuf_, expbuf_, next_;
};

// Split one constraint pattern into an input-consistency check and an
// lc-space constraint for time t; false means an input value contradicts the
// stream (the constrained event is empty).
bool lc_constraint_at(const Compiled& c, const InputExecution& input, const FiringPattern& pat,
                      int t, StepConstraint& out);

// Probability of the intersection of per-step constraints on an already
// compiled network, sharing its probability cache across calls.
double cone_on(const Compiled& c, const InputExecution& input,
               std::span<const FiringPattern> constraints);

// Serialized trace keys: per step one row of '0'/'1' over the external
// neurons in canonical order, steps joined with ';'. t is the step index the
// row belongs to (0 for the first row of a key).
void key_append_row(std::string& key, std::uint32_t ext_row, int n_ext, int t);
std::string key_parent(const std::string& key, int n_ext);
int key_length(const std::string& key, int n_ext); // trace length encoded by the key
bool key_bit(const std::string& key, int n_ext, int t, int pos);

// External row at the current step from the input row plus an output pattern
// (out-bit order), as an ext-bit mask in canonical external order.
std::uint32_t ext_row_bits(const Compiled& c, std::uint32_t in_mask_neurons, std::uint32_t out_pattern);

} // namespace snn::detail
