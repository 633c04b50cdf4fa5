#include "snn/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <json.hpp>

namespace snn {

using nlohmann::json;

const char* to_string(NeuronClass c) {
    switch (c) {
    case NeuronClass::Input: return "input";
    case NeuronClass::Output: return "output";
    case NeuronClass::Internal: return "internal";
    }
    return "?";
}

const char* to_string(Extension e) {
    switch (e) {
    case Extension::Zeros: return "zeros";
    case Extension::Hold: return "hold";
    case Extension::Cycle: return "cycle";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// FiringPattern

FiringPattern::FiringPattern(std::vector<std::string> domain, std::vector<std::uint8_t> values) {
    if (domain.size() != values.size())
        throw ModelError("firing pattern: domain and value counts differ");
    std::vector<std::size_t> order(domain.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return domain[a] < domain[b]; });
    domain_.reserve(domain.size());
    values_.reserve(values.size());
    for (std::size_t i : order) {
        if (!domain_.empty() && domain_.back() == domain[i])
            throw ModelError("firing pattern: duplicate neuron '" + domain[i] + "'");
        domain_.push_back(std::move(domain[i]));
        values_.push_back(values[i] ? 1 : 0);
    }
}

FiringPattern FiringPattern::from_map(const std::map<std::string, bool>& m) {
    std::vector<std::string> d;
    std::vector<std::uint8_t> v;
    for (const auto& [name, fires] : m) {
        d.push_back(name);
        v.push_back(fires ? 1 : 0);
    }
    return FiringPattern(std::move(d), std::move(v));
}

bool FiringPattern::has(const std::string& name) const {
    return std::binary_search(domain_.begin(), domain_.end(), name);
}

bool FiringPattern::value(const std::string& name) const {
    auto it = std::lower_bound(domain_.begin(), domain_.end(), name);
    if (it == domain_.end() || *it != name)
        throw ModelError("firing pattern: neuron '" + name + "' not in domain");
    return values_[static_cast<std::size_t>(it - domain_.begin())] != 0;
}

FiringPattern FiringPattern::project(std::span<const std::string> subset) const {
    std::vector<std::string> d(subset.begin(), subset.end());
    std::sort(d.begin(), d.end());
    std::vector<std::uint8_t> v;
    v.reserve(d.size());
    for (const auto& name : d)
        v.push_back(value(name) ? 1 : 0); // value() throws if not a subset
    return FiringPattern(std::move(d), std::move(v));
}

std::optional<FiringPattern> FiringPattern::merged(const FiringPattern& a, const FiringPattern& b) {
    std::vector<std::string> d;
    std::vector<std::uint8_t> v;
    std::size_t i = 0, j = 0;
    while (i < a.domain_.size() || j < b.domain_.size()) {
        if (j == b.domain_.size() || (i < a.domain_.size() && a.domain_[i] < b.domain_[j])) {
            d.push_back(a.domain_[i]);
            v.push_back(a.values_[i]);
            ++i;
        } else if (i == a.domain_.size() || b.domain_[j] < a.domain_[i]) {
            d.push_back(b.domain_[j]);
            v.push_back(b.values_[j]);
            ++j;
        } else {
            if (a.values_[i] != b.values_[j])
                return std::nullopt;
            d.push_back(a.domain_[i]);
            v.push_back(a.values_[i]);
            ++i, ++j;
        }
    }
    return FiringPattern(std::move(d), std::move(v));
}

// ---------------------------------------------------------------------------
// Execution

Execution Execution::prefix(int t) const {
    if (t < 0 || t > length())
        throw ModelError("execution prefix length out of range");
    return Execution{{steps.begin(), steps.begin() + t + 1}};
}

Execution Execution::project(std::span<const std::string> subset) const {
    Execution out;
    out.steps.reserve(steps.size());
    for (const auto& p : steps)
        out.steps.push_back(p.project(subset));
    return out;
}

// ---------------------------------------------------------------------------
// InputExecution

InputExecution InputExecution::make(std::vector<std::string> inputs,
                                    std::vector<std::vector<std::uint8_t>> prefix,
                                    Extension extension) {
    if (prefix.empty())
        throw ModelError("input execution: prefix must be non-empty");
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return inputs[a] < inputs[b]; });

    InputExecution out;
    out.extension = extension;
    for (std::size_t i : order) {
        if (!out.inputs.empty() && out.inputs.back() == inputs[i])
            throw ModelError("input execution: duplicate input '" + inputs[i] + "'");
        out.inputs.push_back(inputs[i]);
    }
    out.prefix.reserve(prefix.size());
    for (const auto& row : prefix) {
        if (row.size() != inputs.size())
            throw ModelError("input execution: row width does not match input count");
        std::vector<std::uint8_t> sorted_row(row.size());
        for (std::size_t k = 0; k < order.size(); ++k)
            sorted_row[k] = row[order[k]] ? 1 : 0;
        out.prefix.push_back(std::move(sorted_row));
    }
    return out;
}

InputExecution InputExecution::zeros(std::vector<std::string> inputs) {
    std::vector<std::uint8_t> row(inputs.size(), 0);
    return make(std::move(inputs), {row}, Extension::Zeros);
}

std::vector<std::uint8_t> InputExecution::row(int t) const {
    if (t < 0)
        throw ModelError("input execution: negative time");
    const auto n = static_cast<std::size_t>(t);
    if (n < prefix.size())
        return prefix[n];
    switch (extension) {
    case Extension::Zeros: return std::vector<std::uint8_t>(inputs.size(), 0);
    case Extension::Hold: return prefix.back();
    case Extension::Cycle: return prefix[n % prefix.size()];
    }
    return {};
}

FiringPattern InputExecution::at(int t) const {
    return FiringPattern(inputs, row(t));
}

// ---------------------------------------------------------------------------
// Network

Network::Network(std::vector<NeuronSpec> neurons, std::vector<Edge> edges)
    : neurons_(std::move(neurons)), edges_(std::move(edges)) {
    std::sort(neurons_.begin(), neurons_.end(),
              [](const NeuronSpec& a, const NeuronSpec& b) { return a.name < b.name; });
    for (int i = 0; i < size(); ++i) {
        if (!index_.emplace(neurons_[i].name, i).second)
            throw ModelError("duplicate neuron name '" + neurons_[i].name + "'");
        switch (neurons_[i].cls) {
        case NeuronClass::Input: inputs_.push_back(i); break;
        case NeuronClass::Output: outputs_.push_back(i); break;
        case NeuronClass::Internal: internals_.push_back(i); break;
        }
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.from, a.to) < std::tie(b.from, b.to);
    });
    incoming_.resize(neurons_.size());
    for (const Edge& e : edges_) {
        auto from = index_.find(e.from);
        auto to = index_.find(e.to);
        if (from != index_.end() && to != index_.end())
            incoming_[to->second].push_back({from->second, e.weight});
    }
}

bool Network::has(const std::string& name) const { return index_.count(name) != 0; }

int Network::index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw ModelError("no neuron named '" + name + "'");
    return it->second;
}

std::vector<int> Network::external_indices() const {
    std::vector<int> out;
    out.reserve(inputs_.size() + outputs_.size());
    for (int i = 0; i < size(); ++i)
        if (neurons_[i].cls != NeuronClass::Internal)
            out.push_back(i);
    return out;
}

std::vector<int> Network::lc_indices() const {
    std::vector<int> out;
    out.reserve(outputs_.size() + internals_.size());
    for (int i = 0; i < size(); ++i)
        if (neurons_[i].cls != NeuronClass::Input)
            out.push_back(i);
    return out;
}

namespace {
std::vector<std::string> names_at(const Network& net, const std::vector<int>& idx) {
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (int i : idx)
        out.push_back(net.neuron(i).name);
    return out;
}
} // namespace

std::vector<std::string> Network::names() const {
    std::vector<std::string> out;
    out.reserve(neurons_.size());
    for (const auto& n : neurons_)
        out.push_back(n.name);
    return out;
}
std::vector<std::string> Network::input_names() const { return names_at(*this, inputs_); }
std::vector<std::string> Network::output_names() const { return names_at(*this, outputs_); }
std::vector<std::string> Network::internal_names() const { return names_at(*this, internals_); }
std::vector<std::string> Network::external_names() const { return names_at(*this, external_indices()); }
std::vector<std::string> Network::lc_names() const { return names_at(*this, lc_indices()); }

Network Network::renamed(const std::map<std::string, std::string>& mapping) const {
    auto subst = [&](const std::string& name) {
        auto it = mapping.find(name);
        return it == mapping.end() ? name : it->second;
    };
    std::vector<NeuronSpec> ns = neurons_;
    for (auto& n : ns)
        n.name = subst(n.name);
    std::vector<Edge> es = edges_;
    for (auto& e : es) {
        e.from = subst(e.from);
        e.to = subst(e.to);
    }
    return Network(std::move(ns), std::move(es));
}

// ---------------------------------------------------------------------------
// Free functions

std::vector<Violation> validate_network(const Network& net) {
    std::vector<Violation> out;
    for (const auto& n : net.neurons())
        if (n.name.empty())
            out.push_back({"empty-name", "neuron with empty name"});
    const Edge* prev = nullptr;
    for (const Edge& e : net.edges()) {
        const std::string label = "edge " + e.from + " -> " + e.to;
        if (!net.has(e.from))
            out.push_back({"unknown-endpoint", label + ": no neuron named '" + e.from + "'"});
        if (!net.has(e.to))
            out.push_back({"unknown-endpoint", label + ": no neuron named '" + e.to + "'"});
        else if (net.neuron(net.index(e.to)).cls == NeuronClass::Input)
            out.push_back({"input-has-incoming-edge", label + ": '" + e.to + "' is an input"});
        if (e.weight == 0.0)
            out.push_back({"zero-weight", label});
        if (prev && prev->from == e.from && prev->to == e.to)
            out.push_back({"duplicate-edge", label});
        prev = &e;
    }
    return out;
}

double potential(const Network& net, const FiringPattern& prev, const std::string& u) {
    if (prev.domain() != net.names())
        throw ModelError("potential: configuration must cover every neuron");
    const int ui = net.index(u);
    if (net.neuron(ui).cls == NeuronClass::Input)
        throw ModelError("potential: '" + u + "' is an input neuron");
    double pot = -net.neuron(ui).bias;
    for (const auto& [src, weight] : net.incoming(ui))
        if (prev.values()[src])
            pot += weight;
    return pot;
}

double firing_probability(double pot, double lambda) {
    if (!(lambda > 0.0))
        throw ModelError("firing_probability: lambda must be positive");
    const double z = pot / lambda;
    const double e = std::exp(z >= 0.0 ? -z : z);
    const double p = (z >= 0.0 ? 1.0 : e) / (1.0 + e);
    // The model needs probabilities strictly inside (0,1): clamp where the
    // quotient saturates (|z| beyond ~36) so no transition gets weight 0 or 1.
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    return std::min(hi, std::max(lo, p));
}

FiringPattern initial_configuration(const Network& net, const FiringPattern& input0) {
    if (input0.domain() != net.input_names())
        throw ModelError("initial_configuration: pattern must cover exactly the input neurons");
    std::vector<std::string> d;
    std::vector<std::uint8_t> v;
    for (const auto& n : net.neurons()) {
        d.push_back(n.name);
        v.push_back(n.cls == NeuronClass::Input ? (input0.value(n.name) ? 1 : 0)
                                                : (n.init ? 1 : 0));
    }
    return FiringPattern(std::move(d), std::move(v));
}

// ---------------------------------------------------------------------------
// JSON

std::string network_to_json(const Network& net, int indent) {
    json doc;
    doc["neurons"] = json::array();
    for (const auto& n : net.neurons()) {
        json j;
        j["name"] = n.name;
        j["class"] = to_string(n.cls);
        if (n.cls != NeuronClass::Input) {
            j["bias"] = n.bias;
            j["init"] = n.init ? 1 : 0;
        }
        doc["neurons"].push_back(std::move(j));
    }
    doc["edges"] = json::array();
    for (const auto& e : net.edges())
        doc["edges"].push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
    return doc.dump(indent);
}

namespace {

json parse_or_throw(const std::string& text, const char* what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded())
        throw ModelError(std::string(what) + ": malformed JSON");
    return doc;
}

NeuronClass class_from_string(const std::string& s) {
    if (s == "input") return NeuronClass::Input;
    if (s == "output") return NeuronClass::Output;
    if (s == "internal") return NeuronClass::Internal;
    throw ModelError("network: unknown neuron class '" + s + "'");
}

} // namespace

Network network_from_json(const std::string& text) {
    const json doc = parse_or_throw(text, "network");
    if (!doc.is_object() || !doc.contains("neurons") || !doc["neurons"].is_array())
        throw ModelError("network: expected an object with a 'neurons' array");
    std::vector<NeuronSpec> neurons;
    for (const auto& j : doc["neurons"]) {
        if (!j.is_object() || !j.contains("name") || !j["name"].is_string() ||
            !j.contains("class") || !j["class"].is_string())
            throw ModelError("network: each neuron needs a 'name' and a 'class'");
        NeuronSpec n;
        n.name = j["name"].get<std::string>();
        n.cls = class_from_string(j["class"].get<std::string>());
        if (n.cls == NeuronClass::Input) {
            if (j.contains("bias") || j.contains("init"))
                throw ModelError("network: input neuron '" + n.name +
                                 "' must not carry 'bias' or 'init'");
        } else {
            if (!j.contains("bias") || !j["bias"].is_number())
                throw ModelError("network: neuron '" + n.name + "' needs a numeric 'bias'");
            if (!j.contains("init") || !j["init"].is_number_integer() ||
                (j["init"].get<int>() != 0 && j["init"].get<int>() != 1))
                throw ModelError("network: neuron '" + n.name + "' needs 'init' of 0 or 1");
            n.bias = j["bias"].get<double>();
            n.init = j["init"].get<int>() == 1;
        }
        neurons.push_back(std::move(n));
    }
    std::vector<Edge> edges;
    if (doc.contains("edges")) {
        if (!doc["edges"].is_array())
            throw ModelError("network: 'edges' must be an array");
        for (const auto& j : doc["edges"]) {
            if (!j.is_object() || !j.contains("from") || !j["from"].is_string() ||
                !j.contains("to") || !j["to"].is_string() || !j.contains("weight") ||
                !j["weight"].is_number())
                throw ModelError("network: each edge needs 'from', 'to', and a numeric 'weight'");
            edges.push_back({j["from"].get<std::string>(), j["to"].get<std::string>(),
                             j["weight"].get<double>()});
        }
    }
    return Network(std::move(neurons), std::move(edges));
}

std::string input_execution_to_json(const InputExecution& in, int indent) {
    json doc;
    doc["inputs"] = in.inputs;
    doc["prefix"] = json::array();
    for (const auto& row : in.prefix) {
        json r = json::array();
        for (auto b : row)
            r.push_back(static_cast<int>(b));
        doc["prefix"].push_back(std::move(r));
    }
    doc["extension"] = to_string(in.extension);
    return doc.dump(indent);
}

InputExecution input_execution_from_json(const std::string& text) {
    const json doc = parse_or_throw(text, "input execution");
    if (!doc.is_object() || !doc.contains("inputs") || !doc["inputs"].is_array() ||
        !doc.contains("prefix") || !doc["prefix"].is_array())
        throw ModelError("input execution: expected 'inputs' and 'prefix' arrays");
    std::vector<std::string> inputs;
    for (const auto& j : doc["inputs"]) {
        if (!j.is_string())
            throw ModelError("input execution: 'inputs' must contain names");
        inputs.push_back(j.get<std::string>());
    }
    std::vector<std::vector<std::uint8_t>> prefix;
    for (const auto& row : doc["prefix"]) {
        if (!row.is_array() || row.size() != inputs.size())
            throw ModelError("input execution: each prefix row must list one value per input");
        std::vector<std::uint8_t> r;
        for (const auto& b : row) {
            if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1))
                throw ModelError("input execution: prefix values must be 0 or 1");
            r.push_back(static_cast<std::uint8_t>(b.get<int>()));
        }
        prefix.push_back(std::move(r));
    }
    Extension ext = Extension::Zeros;
    if (doc.contains("extension")) {
        const std::string s = doc["extension"].get<std::string>();
        if (s == "zeros") ext = Extension::Zeros;
        else if (s == "hold") ext = Extension::Hold;
        else if (s == "cycle") ext = Extension::Cycle;
        else throw ModelError("input execution: unknown extension '" + s + "'");
    }
    return InputExecution::make(std::move(inputs), std::move(prefix), ext);
}

std::string execution_to_json(const Execution& e, int indent) {
    json doc;
    doc["domain"] = e.steps.empty() ? std::vector<std::string>{} : e.steps.front().domain();
    doc["steps"] = json::array();
    for (const auto& step : e.steps) {
        json row = json::array();
        for (auto b : step.values())
            row.push_back(static_cast<int>(b));
        doc["steps"].push_back(std::move(row));
    }
    return doc.dump(indent);
}

Execution execution_from_json(const std::string& text) {
    const json doc = parse_or_throw(text, "execution");
    if (!doc.is_object() || !doc.contains("domain") || !doc["domain"].is_array() ||
        !doc.contains("steps") || !doc["steps"].is_array())
        throw ModelError("execution: expected 'domain' and 'steps' arrays");
    std::vector<std::string> domain;
    for (const auto& j : doc["domain"]) {
        if (!j.is_string())
            throw ModelError("execution: 'domain' must contain names");
        domain.push_back(j.get<std::string>());
    }
    Execution e;
    for (const auto& row : doc["steps"]) {
        if (!row.is_array() || row.size() != domain.size())
            throw ModelError("execution: each step must list one value per domain neuron");
        std::vector<std::uint8_t> values;
        for (const auto& b : row) {
            if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1))
                throw ModelError("execution: step values must be 0 or 1");
            values.push_back(static_cast<std::uint8_t>(b.get<int>()));
        }
        e.steps.emplace_back(domain, std::move(values));
    }
    return e;
}

} // namespace snn
