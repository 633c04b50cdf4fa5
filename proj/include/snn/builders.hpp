#pragma once

// Constructors for the concrete networks used throughout the test suites:
// calibrated Boolean gates, an Xor circuit assembled by three binary
// compositions, a Winner-Take-All network with two inhibitors, a Filter bank
// of And gates, their Attention composition, and a two-network cyclic toy.
//
// Gates are calibrated through the constant L = lambda * ln((1-delta)/delta):
// with bias and weights set as below, the boundary potentials are exactly +L
// or -L, which the sigmoid maps to firing probabilities 1-delta and delta.

#include <string>
#include <vector>

#include "snn/core.hpp"

namespace snn {

struct GateParams {
    double delta = 0.1; // per-gate one-step failure probability, in (0, 1/2)
    double lambda = 1.0; // sigmoid temperature, > 0

    // lambda * ln((1-delta)/delta); positive precisely when delta < 1/2.
    double L() const;
};

// Throws ModelError unless 0 < delta < 1/2 and lambda > 0. (delta >= 1/2
// flips L's sign and with it every intended threshold, so the builders
// reject it even though the model itself would accept such weights.)
void validate_gate_params(const GateParams& p);

// One input, one output: the output copies the input's previous value with
// probability exactly 1-delta (bias L, edge weight 2L).
Network identity_gate(const GateParams& p, const std::string& input = "x",
                      const std::string& output = "y");

// k inputs, one output; fires with probability 1-delta when all k inputs
// fired, and at most delta otherwise (bias (2k-1)L, weights 2L). With k = 1
// and default names this is exactly identity_gate. Default input names are
// x1..xk for k >= 2 and just "x" for k = 1, so that the one-input special
// cases coincide with the Identity network.
Network and_gate(int k, const GateParams& p);
Network and_gate(const std::vector<std::string>& inputs, const std::string& output,
                 const GateParams& p);

// k inputs, one output; fires with probability at least 1-delta when any
// input fired, and delta when none did (bias L, weights 2L).
Network or_gate(int k, const GateParams& p);
Network or_gate(const std::vector<std::string>& inputs, const std::string& output,
                const GateParams& p);

// Input, inhibitor, output. The inhibitor copies the input (bias L, in-edge
// 2L); the output fires unless inhibited (bias -L, in-edge -2L), so the
// network computes Not with a delay of 2 and per-stage failure delta.
Network not_gate(const GateParams& p, const std::string& input = "x",
                 const std::string& inhibitor = "a", const std::string& output = "y");

// Two-input Xor assembled by three binary compositions: And(x1,x2) -> o_and,
// a Not stage turning o_and into o_nand (inhibitor a_nand), Or(x1,x2) ->
// o_or, and And(o_nand, o_or) -> o_xor. 2 inputs, 4 outputs, 1 internal.
// With stable inputs the o_xor value at time 4 is the Xor of the inputs with
// probability at least (1-delta)^5.
Network xor_circuit(const GateParams& p);

// Weight/bias multipliers for the Winner-Take-All network; every field is
// scaled by the weighting factor gamma when the network is built. The
// default profile realizes the intended dynamics:
//   - output y_i: bias 2, driven by x_i with 3 and by itself with 2;
//   - "stability" inhibitor as: a >= 1 threshold over the outputs (bias 1,
//     in-edges 2) feeding every output with -2;
//   - "convergence" inhibitor ac: a >= 2 threshold (bias 3, in-edges 2)
//     feeding every output with -1.
// A firing output whose input fires sees potential gamma with only the
// stability inhibitor active (it keeps firing), -gamma if it is not firing
// (it stays off), and exactly 0 when both inhibitors fire, so each firing
// output survives a contested round with probability 1/2.
struct WtaWeights {
    double input_drive = 3.0; // x_i -> y_i
    double self_excite = 2.0; // y_i -> y_i
    double output_bias = 2.0;
    double stab_in = 2.0; // y_j -> as
    double stab_bias = 1.0;
    double stab_out = -2.0; // as -> y_i
    double conv_in = 2.0; // y_j -> ac
    double conv_bias = 3.0;
    double conv_out = -1.0; // ac -> y_i
};

// Weighting factor at which the default profile converges fast and holds the
// winner reliably (sharp enough sigmoids at unit temperature).
inline constexpr double kDefaultWtaGamma = 8.0;

// n inputs x1..xn, n outputs y1..yn, two internal inhibitors "as" and "ac".
// All non-input neurons start not firing.
Network wta_network(int n, double gamma, const WtaWeights& profile = WtaWeights());

// n disjoint two-input And gates: inputs w1..wn and y1..yn, outputs z1..zn,
// with z_i computing w_i AND y_i one step later (per-gate failure delta).
Network filter_network(int n, const GateParams& p);

// compose(wta_network, filter_network): the WTA's y outputs drive the
// Filter's y inputs by name. Inputs x1..xn, w1..wn; outputs y1..yn, z1..zn.
// The composition is acyclic (nothing feeds back into the WTA).
Network attention_network(int n, double gamma, const GateParams& p,
                          const WtaWeights& profile = WtaWeights());

// Two mutually-connected networks. n1: input x1, internal a1, output x2 with
// a self-loop (x1 -> a1 -> x2 -> x2). n2: input x2, internal a2, output x1,
// no self-loop. All biases L, all weights 2L. The composite has no inputs,
// outputs {x1, x2}, internals {a1, a2}; initial firing is x1_init/x2_init on
// x1/x2 and 0 elsewhere.
struct CyclicToy {
    Network n1;
    Network n2;
    Network composite;
};

CyclicToy cyclic_toy(const GateParams& p, bool x1_init = true, bool x2_init = false);

} // namespace snn
