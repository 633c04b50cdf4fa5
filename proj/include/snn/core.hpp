#pragma once

// Core model: stochastic spiking networks in discrete time. A network is a
// finite set of named neurons partitioned into inputs, outputs, and internal
// neurons, plus weighted directed edges. Outputs and internal neurons carry a
// bias and an initial firing state; input neurons receive no edges and are
// driven externally by an InputExecution. Neurons are kept in canonical
// (lexicographic) name order everywhere, which fixes enumeration and
// serialization order throughout the engine.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace snn {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class NeuronClass { Input, Output, Internal };

const char* to_string(NeuronClass c);

struct NeuronSpec {
    std::string name;
    NeuronClass cls = NeuronClass::Internal;
    double bias = 0.0; // unused for inputs
    bool init = false; // initial firing state; unused for inputs
};

struct Edge {
    std::string from;
    std::string to;
    double weight = 0.0;
};

struct Violation {
    std::string kind; // "input-has-incoming-edge", "zero-weight", ...
    std::string detail;
};

// A 0/1 assignment over a fixed, sorted set of neuron names.
class FiringPattern {
public:
    FiringPattern() = default;
    FiringPattern(std::vector<std::string> domain, std::vector<std::uint8_t> values);
    static FiringPattern from_map(const std::map<std::string, bool>& m);

    const std::vector<std::string>& domain() const { return domain_; }
    std::size_t size() const { return domain_.size(); }
    bool has(const std::string& name) const;
    bool value(const std::string& name) const; // throws ModelError if absent
    const std::vector<std::uint8_t>& values() const { return values_; }

    // Restriction to a subset of the domain; throws ModelError otherwise.
    FiringPattern project(std::span<const std::string> subset) const;

    // Union of two patterns; nullopt if they disagree on a shared neuron.
    static std::optional<FiringPattern> merged(const FiringPattern& a, const FiringPattern& b);

    bool operator==(const FiringPattern&) const = default;

private:
    std::vector<std::string> domain_; // sorted, unique
    std::vector<std::uint8_t> values_;
};

// A finite sequence of firing patterns over one fixed domain. The pattern at
// index t is the configuration at time t, so a vector of T+1 patterns is an
// execution of length T.
struct Execution {
    std::vector<FiringPattern> steps;

    int length() const { return static_cast<int>(steps.size()) - 1; }
    Execution prefix(int t) const; // first t+1 patterns; throws if t > length
    Execution project(std::span<const std::string> subset) const;

    bool operator==(const Execution&) const = default;
};

// An infinite input stream presented as a finite prefix plus an extension
// rule: all-zero rows, hold the last row, or cycle through the prefix.
enum class Extension { Zeros, Hold, Cycle };

const char* to_string(Extension e);

struct InputExecution {
    std::vector<std::string> inputs; // sorted, unique
    std::vector<std::vector<std::uint8_t>> prefix; // non-empty; rows match inputs
    Extension extension = Extension::Zeros;

    static InputExecution make(std::vector<std::string> inputs,
                               std::vector<std::vector<std::uint8_t>> prefix,
                               Extension extension = Extension::Zeros);
    // All-zero stream over the given input names.
    static InputExecution zeros(std::vector<std::string> inputs);

    FiringPattern at(int t) const; // materialize the row at time t >= 0
    std::vector<std::uint8_t> row(int t) const;

    bool operator==(const InputExecution&) const = default;
};

class Network {
public:
    Network() = default;
    // Sorts neurons into canonical order and edges by (from, to). Throws
    // ModelError on duplicate neuron names or duplicate (from, to) edges;
    // every other structural defect is reported by validate_network().
    Network(std::vector<NeuronSpec> neurons, std::vector<Edge> edges);

    int size() const { return static_cast<int>(neurons_.size()); }
    const std::vector<NeuronSpec>& neurons() const { return neurons_; }
    const std::vector<Edge>& edges() const { return edges_; }

    bool has(const std::string& name) const;
    int index(const std::string& name) const; // throws ModelError if absent
    const NeuronSpec& neuron(int i) const { return neurons_[i]; }

    // Index sets in canonical order.
    const std::vector<int>& input_indices() const { return inputs_; }
    const std::vector<int>& output_indices() const { return outputs_; }
    const std::vector<int>& internal_indices() const { return internals_; }
    std::vector<int> external_indices() const;
    std::vector<int> lc_indices() const; // outputs + internals ("locally controlled")

    std::vector<std::string> names() const;
    std::vector<std::string> input_names() const;
    std::vector<std::string> output_names() const;
    std::vector<std::string> internal_names() const;
    std::vector<std::string> external_names() const;
    std::vector<std::string> lc_names() const;

    struct InEdge {
        int src;
        double weight;
    };
    // Incoming edges of neuron i (only edges whose endpoints both resolve).
    const std::vector<InEdge>& incoming(int i) const { return incoming_[i]; }

    // Copy with neurons renamed per the map (names absent from the map are
    // kept). Throws ModelError if the result would duplicate a name.
    Network renamed(const std::map<std::string, std::string>& mapping) const;

private:
    std::vector<NeuronSpec> neurons_; // canonical order
    std::vector<Edge> edges_; // sorted by (from, to)
    std::map<std::string, int> index_;
    std::vector<int> inputs_, outputs_, internals_;
    std::vector<std::vector<InEdge>> incoming_;
};

// Structural checks: edge endpoints exist, no edges into input neurons (self-
// loops included), no zero-weight edges, no empty names. Returns all
// violations found; an empty result means the network is well formed.
std::vector<Violation> validate_network(const Network& net);

// Membrane potential of a non-input neuron u given the previous configuration
// (a pattern over all neurons): sum of weights from firing predecessors minus
// the bias of u.
double potential(const Network& net, const FiringPattern& prev, const std::string& u);

// 1 / (1 + exp(-pot / lambda)); strictly inside (0,1). lambda must be > 0.
double firing_probability(double pot, double lambda);

// Configuration at time 0: the given values on input neurons joined with the
// stored initial state of every output/internal neuron. input0 must cover
// exactly the input neurons.
FiringPattern initial_configuration(const Network& net, const FiringPattern& input0);

// JSON serialization. Parsing throws ModelError on malformed documents.
std::string network_to_json(const Network& net, int indent = 2);
Network network_from_json(const std::string& text);
std::string input_execution_to_json(const InputExecution& in, int indent = 2);
InputExecution input_execution_from_json(const std::string& text);
std::string execution_to_json(const Execution& e, int indent = 2);
Execution execution_from_json(const std::string& text);

} // namespace snn
