#include "snn/builders.hpp"

#include <cmath>

#include "snn/compose.hpp"

namespace snn {

double GateParams::L() const { return lambda * std::log((1.0 - delta) / delta); }

void validate_gate_params(const GateParams& p) {
    if (!(p.lambda > 0.0))
        throw ModelError("gate parameters: lambda must be positive");
    if (!(p.delta > 0.0 && p.delta < 0.5))
        throw ModelError("gate parameters: delta must lie in (0, 1/2)");
}

namespace {

std::vector<std::string> default_inputs(int k) {
    if (k == 1)
        return {"x"};
    std::vector<std::string> names;
    for (int i = 1; i <= k; ++i)
        names.push_back("x" + std::to_string(i));
    return names;
}

// Common body of the threshold gates: one output with the given bias, one
// 2L-weight edge per input.
Network fan_in_gate(const std::vector<std::string>& inputs, const std::string& output,
                    const GateParams& p, double bias) {
    validate_gate_params(p);
    if (inputs.empty())
        throw ModelError("gate: at least one input neuron is required");
    std::vector<NeuronSpec> specs;
    std::vector<Edge> edges;
    for (const auto& in : inputs) {
        specs.push_back({in, NeuronClass::Input, 0.0, false});
        edges.push_back({in, output, 2.0 * p.L()});
    }
    specs.push_back({output, NeuronClass::Output, bias, false});
    return Network(std::move(specs), std::move(edges));
}

} // namespace

Network identity_gate(const GateParams& p, const std::string& input, const std::string& output) {
    return fan_in_gate({input}, output, p, p.L());
}

Network and_gate(const std::vector<std::string>& inputs, const std::string& output,
                 const GateParams& p) {
    return fan_in_gate(inputs, output, p, (2.0 * static_cast<double>(inputs.size()) - 1.0) * p.L());
}

Network and_gate(int k, const GateParams& p) { return and_gate(default_inputs(k), "y", p); }

Network or_gate(const std::vector<std::string>& inputs, const std::string& output,
                const GateParams& p) {
    return fan_in_gate(inputs, output, p, p.L());
}

Network or_gate(int k, const GateParams& p) { return or_gate(default_inputs(k), "y", p); }

Network not_gate(const GateParams& p, const std::string& input, const std::string& inhibitor,
                 const std::string& output) {
    validate_gate_params(p);
    const double L = p.L();
    std::vector<NeuronSpec> specs = {
        {input, NeuronClass::Input, 0.0, false},
        {inhibitor, NeuronClass::Internal, L, false},
        {output, NeuronClass::Output, -L, false},
    };
    std::vector<Edge> edges = {
        {input, inhibitor, 2.0 * L},
        {inhibitor, output, -2.0 * L},
    };
    return Network(std::move(specs), std::move(edges));
}

Network xor_circuit(const GateParams& p) {
    const Network first_and = and_gate({"x1", "x2"}, "o_and", p);
    const Network nand_stage = not_gate(p, "o_and", "a_nand", "o_nand");
    const Network with_nand = compose(first_and, nand_stage);
    const Network with_or = compose(with_nand, or_gate({"x1", "x2"}, "o_or", p));
    return compose(with_or, and_gate({"o_nand", "o_or"}, "o_xor", p));
}

Network wta_network(int n, double gamma, const WtaWeights& w) {
    if (n < 1)
        throw ModelError("winner-take-all: n must be at least 1");
    if (!(gamma > 0.0))
        throw ModelError("winner-take-all: gamma must be positive");
    std::vector<NeuronSpec> specs;
    std::vector<Edge> edges;
    specs.push_back({"as", NeuronClass::Internal, gamma * w.stab_bias, false});
    specs.push_back({"ac", NeuronClass::Internal, gamma * w.conv_bias, false});
    for (int i = 1; i <= n; ++i) {
        const std::string x = "x" + std::to_string(i);
        const std::string y = "y" + std::to_string(i);
        specs.push_back({x, NeuronClass::Input, 0.0, false});
        specs.push_back({y, NeuronClass::Output, gamma * w.output_bias, false});
        edges.push_back({x, y, gamma * w.input_drive});
        edges.push_back({y, y, gamma * w.self_excite});
        edges.push_back({y, "as", gamma * w.stab_in});
        edges.push_back({y, "ac", gamma * w.conv_in});
        edges.push_back({"as", y, gamma * w.stab_out});
        edges.push_back({"ac", y, gamma * w.conv_out});
    }
    return Network(std::move(specs), std::move(edges));
}

Network filter_network(int n, const GateParams& p) {
    validate_gate_params(p);
    if (n < 1)
        throw ModelError("filter: n must be at least 1");
    std::vector<NeuronSpec> specs;
    std::vector<Edge> edges;
    const double L = p.L();
    for (int i = 1; i <= n; ++i) {
        const std::string w = "w" + std::to_string(i);
        const std::string y = "y" + std::to_string(i);
        const std::string z = "z" + std::to_string(i);
        specs.push_back({w, NeuronClass::Input, 0.0, false});
        specs.push_back({y, NeuronClass::Input, 0.0, false});
        specs.push_back({z, NeuronClass::Output, 3.0 * L, false}); // 2-input And
        edges.push_back({w, z, 2.0 * L});
        edges.push_back({y, z, 2.0 * L});
    }
    return Network(std::move(specs), std::move(edges));
}

Network attention_network(int n, double gamma, const GateParams& p, const WtaWeights& profile) {
    return compose(wta_network(n, gamma, profile), filter_network(n, p));
}

CyclicToy cyclic_toy(const GateParams& p, bool x1_init, bool x2_init) {
    validate_gate_params(p);
    const double L = p.L();
    CyclicToy toy;
    toy.n1 = Network({{"x1", NeuronClass::Input, 0.0, false},
                      {"a1", NeuronClass::Internal, L, false},
                      {"x2", NeuronClass::Output, L, x2_init}},
                     {{"x1", "a1", 2.0 * L}, {"a1", "x2", 2.0 * L}, {"x2", "x2", 2.0 * L}});
    toy.n2 = Network({{"x2", NeuronClass::Input, 0.0, false},
                      {"a2", NeuronClass::Internal, L, false},
                      {"x1", NeuronClass::Output, L, x1_init}},
                     {{"x2", "a2", 2.0 * L}, {"a2", "x1", 2.0 * L}});
    toy.composite = compose(toy.n1, toy.n2);
    return toy;
}

} // namespace snn
