#include "snn/compose.hpp"

#include <algorithm>
#include <cmath>

#include "engine_detail.hpp"

namespace snn {

namespace {

std::vector<std::string> sorted_union(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

std::vector<std::string> sorted_minus(const std::vector<std::string>& a,
                                      const std::vector<std::string>& b) {
    std::vector<std::string> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

void require_well_formed(const Network& net, const char* label) {
    if (const auto violations = validate_network(net); !violations.empty()) {
        std::string msg = std::string(label) + " is not well formed:";
        for (const auto& v : violations)
            msg += "\n  [" + v.kind + "] " + v.detail;
        throw ModelError(msg);
    }
}

std::vector<std::string> composite_input_names(const Network& a, const Network& b) {
    return sorted_minus(sorted_union(a.input_names(), b.input_names()),
                        sorted_union(a.output_names(), b.output_names()));
}

std::vector<std::string> composite_external_names(const Network& a, const Network& b) {
    return sorted_union(composite_input_names(a, b),
                        sorted_union(a.output_names(), b.output_names()));
}

} // namespace

CompatibilityReport compatible(const Network& a, const Network& b) {
    CompatibilityReport r;
    for (const auto& name : a.internal_names())
        if (b.has(name))
            r.reasons.push_back("internal neuron '" + name + "' of the first network appears in the second");
    for (const auto& name : b.internal_names())
        if (a.has(name))
            r.reasons.push_back("internal neuron '" + name + "' of the second network appears in the first");
    for (const auto& name : a.output_names())
        if (b.has(name) && b.neuron(b.index(name)).cls == NeuronClass::Output)
            r.reasons.push_back("'" + name + "' is an output of both networks");
    r.ok = r.reasons.empty();
    return r;
}

Network compose(const Network& a, const Network& b) {
    require_well_formed(a, "first network");
    require_well_formed(b, "second network");
    const auto report = compatible(a, b);
    if (!report.ok) {
        std::string msg = "networks are not compatible:";
        for (const auto& reason : report.reasons)
            msg += "\n  " + reason;
        throw ModelError(msg);
    }

    std::vector<NeuronSpec> specs;
    for (const auto& name : sorted_union(a.names(), b.names())) {
        const NeuronSpec* na = a.has(name) ? &a.neuron(a.index(name)) : nullptr;
        const NeuronSpec* nb = b.has(name) ? &b.neuron(b.index(name)) : nullptr;
        if (na && nb) {
            // compatibility leaves only input/input and input/output overlaps
            if (na->cls == NeuronClass::Input && nb->cls == NeuronClass::Input) {
                specs.push_back(*na);
            } else {
                const NeuronSpec& owner = na->cls == NeuronClass::Output ? *na : *nb;
                NeuronSpec s = owner;
                s.cls = NeuronClass::Output;
                specs.push_back(s);
            }
        } else {
            specs.push_back(na ? *na : *nb);
        }
    }
    std::vector<Edge> edges = a.edges();
    edges.insert(edges.end(), b.edges().begin(), b.edges().end());
    Network out(std::move(specs), std::move(edges));
    require_well_formed(out, "composite network");
    return out;
}

bool is_acyclic_composition(const Network& a, const Network& b) {
    if (!compatible(a, b).ok)
        return false;
    for (const auto& name : a.input_names())
        if (b.has(name) && b.neuron(b.index(name)).cls == NeuronClass::Output)
            return false;
    return true;
}

Network hide(const Network& net, const std::set<std::string>& hidden) {
    for (const auto& name : hidden)
        if (!net.has(name) || net.neuron(net.index(name)).cls != NeuronClass::Output)
            throw ModelError("hide: '" + name + "' is not an output neuron");
    std::vector<NeuronSpec> specs = net.neurons();
    for (auto& s : specs)
        if (hidden.count(s.name))
            s.cls = NeuronClass::Internal;
    return Network(std::move(specs), net.edges());
}

ComponentInputSpec derive_component_input(const Network& n1, const Network& n2,
                                          const InputExecution& beta_in, const Execution& observed,
                                          int component, int t) {
    if (component != 1 && component != 2)
        throw ModelError("derive_component_input: component must be 1 or 2");
    if (t < 1)
        throw ModelError("derive_component_input: t must be at least 1");
    if (observed.length() != t - 1)
        throw ModelError("derive_component_input: observed prefix must have length t-1");
    const auto comp_inputs = composite_input_names(n1, n2);
    if (beta_in.inputs != comp_inputs)
        throw ModelError("derive_component_input: beta_in must cover the composite's inputs");
    const auto ext = composite_external_names(n1, n2);
    for (const auto& step : observed.steps)
        if (step.domain() != ext)
            throw ModelError("derive_component_input: observed prefix must cover the composite's externals");

    const Network& self = component == 1 ? n1 : n2;
    ComponentInputSpec spec;
    spec.component = component;

    const auto names = self.input_names();
    std::vector<std::vector<std::uint8_t>> rows(static_cast<std::size_t>(t) + 1,
                                                std::vector<std::uint8_t>(names.size(), 0));
    for (std::size_t k = 0; k < names.size(); ++k) {
        const bool external = std::binary_search(comp_inputs.begin(), comp_inputs.end(), names[k]);
        spec.source[names[k]] = external ? "external" : "cross";
        for (int s = 0; s <= t; ++s) {
            bool fired = false;
            if (external)
                fired = beta_in.at(s).value(names[k]);
            else if (s <= t - 1)
                fired = observed.steps[static_cast<std::size_t>(s)].value(names[k]);
            rows[static_cast<std::size_t>(s)][k] = fired ? 1 : 0;
        }
    }
    spec.derived = InputExecution::make(names, std::move(rows), Extension::Zeros);
    return spec;
}

// ---------------------------------------------------------------------------
// Identity verifiers

namespace {

void check_composite_trace(const Network& comp, const Execution& beta) {
    if (beta.steps.empty())
        throw ModelError("verifier: trace must be non-empty");
    const auto ext = comp.external_names();
    for (const auto& step : beta.steps)
        if (step.domain() != ext)
            throw ModelError("verifier: trace must cover the composite's external neurons");
}

} // namespace

double verify_acyclic_factorization(const Network& n1, const Network& n2,
                                    const EngineParams& params, const InputExecution& beta_in,
                                    const Execution& beta) {
    if (!is_acyclic_composition(n1, n2))
        throw ModelError("verifier: composition is not acyclic");
    const Network comp = compose(n1, n2);
    check_composite_trace(comp, beta);
    const double whole = trace_probability(comp, params, beta_in, beta);

    double product = 1.0;
    for (int j = 1; j <= 2; ++j) {
        const Network& self = j == 1 ? n1 : n2;
        const auto spec = derive_component_input(n1, n2, beta_in, beta, j, beta.length() + 1);
        const Execution part = beta.project(self.external_names());
        product *= trace_probability(self, params, spec.derived, part);
    }
    return std::abs(whole - product);
}

double verify_onestep_factorization(const Network& n1, const Network& n2,
                                    const EngineParams& params, const InputExecution& beta_in,
                                    const Execution& beta) {
    const Network comp = compose(n1, n2);
    check_composite_trace(comp, beta);
    const int t = beta.length();
    if (t < 1)
        throw ModelError("verifier: trace must have length at least 1");
    const Execution beta_p = beta.prefix(t - 1);

    const detail::Compiled cc = detail::compile(comp, params.lambda);
    const double lhs = detail::cone_on(cc, beta_in, beta.steps) /
                       detail::cone_on(cc, beta_in, beta_p.steps);

    double rhs = 1.0;
    for (int j = 1; j <= 2; ++j) {
        const Network& self = j == 1 ? n1 : n2;
        const auto spec = derive_component_input(n1, n2, beta_in, beta_p, j, t);
        const detail::Compiled cj = detail::compile(self, params.lambda);
        std::vector<FiringPattern> den = beta_p.project(self.external_names()).steps;
        std::vector<FiringPattern> num = den;
        num.push_back(beta.steps.back().project(self.output_names()));
        rhs *= detail::cone_on(cj, spec.derived, num) / detail::cone_on(cj, spec.derived, den);
    }
    return std::abs(lhs - rhs);
}

std::array<double, 4> verify_onestep_factorization2(const Network& n1, const Network& n2,
                                                    const EngineParams& params,
                                                    const InputExecution& beta_in,
                                                    const Execution& alpha) {
    const Network comp = compose(n1, n2);
    if (alpha.steps.empty())
        throw ModelError("verifier: execution must be non-empty");
    for (const auto& step : alpha.steps)
        if (step.domain() != comp.names())
            throw ModelError("verifier: execution must cover all composite neurons");
    const int t = alpha.length();
    if (t < 1)
        throw ModelError("verifier: execution must have length at least 1");

    const auto ext = comp.external_names();
    const Execution beta = alpha.project(ext);
    const Execution alpha_p = alpha.prefix(t - 1);
    const Execution beta_p = beta.prefix(t - 1);

    const detail::Compiled cc = detail::compile(comp, params.lambda);
    const double p_alpha = detail::cone_on(cc, beta_in, alpha.steps);
    const double p_alpha_p = detail::cone_on(cc, beta_in, alpha_p.steps);
    const double p_beta = detail::cone_on(cc, beta_in, beta.steps);
    const double p_beta_p = detail::cone_on(cc, beta_in, beta_p.steps);
    std::vector<FiringPattern> mix = alpha_p.steps; // executions seen, then only the trace
    mix.push_back(beta.steps.back());
    const double p_mix = detail::cone_on(cc, beta_in, mix);

    const std::array<double, 4> lhs = {
        p_alpha / p_alpha_p,
        p_mix / p_alpha_p,
        p_alpha / p_beta_p,
        p_beta / p_beta_p,
    };

    std::array<double, 4> rhs = {1.0, 1.0, 1.0, 1.0};
    for (int j = 1; j <= 2; ++j) {
        const Network& self = j == 1 ? n1 : n2;
        const auto spec = derive_component_input(n1, n2, beta_in, beta_p, j, t);
        const detail::Compiled cj = detail::compile(self, params.lambda);

        const auto names = self.names();
        const auto lc = self.lc_names();
        const auto outs = self.output_names();

        const std::vector<FiringPattern> den_exec = alpha_p.project(names).steps;
        const std::vector<FiringPattern> den_trace = beta_p.project(self.external_names()).steps;
        std::vector<FiringPattern> num_lc = den_exec;
        num_lc.push_back(alpha.steps.back().project(lc));
        std::vector<FiringPattern> num_out = den_exec;
        num_out.push_back(alpha.steps.back().project(outs));
        // Restricting the output-column event by the trace prefix leaves no
        // internal constraints, so its numerator extends the trace cone.  The
        // internal-column event keeps the internal history, which together
        // with the trace prefix reconstitutes the execution prefix.
        std::vector<FiringPattern> num_trace_out = den_trace;
        num_trace_out.push_back(alpha.steps.back().project(outs));

        const double d_exec = detail::cone_on(cj, spec.derived, den_exec);
        const double d_trace = detail::cone_on(cj, spec.derived, den_trace);
        const double n_lc = detail::cone_on(cj, spec.derived, num_lc);
        const double n_out = detail::cone_on(cj, spec.derived, num_out);
        const double n_trace_out = detail::cone_on(cj, spec.derived, num_trace_out);

        rhs[0] *= n_lc / d_exec;
        rhs[1] *= n_out / d_exec;
        rhs[2] *= n_lc / d_trace;
        rhs[3] *= n_trace_out / d_trace;
    }

    return {std::abs(lhs[0] - rhs[0]), std::abs(lhs[1] - rhs[1]), std::abs(lhs[2] - rhs[2]),
            std::abs(lhs[3] - rhs[3])};
}

double verify_execution_independence(const Network& n1, const Network& n2,
                                     const EngineParams& params, const InputExecution& beta_in,
                                     const Execution& alpha) {
    const Network comp = compose(n1, n2);
    if (alpha.steps.empty())
        throw ModelError("verifier: execution must be non-empty");
    for (const auto& step : alpha.steps)
        if (step.domain() != comp.names())
            throw ModelError("verifier: execution must cover all composite neurons");

    const detail::Compiled cc = detail::compile(comp, params.lambda);
    const Execution beta = alpha.project(comp.external_names());
    const double lhs = detail::cone_on(cc, beta_in, alpha.steps) /
                       detail::cone_on(cc, beta_in, beta.steps);

    double rhs = 1.0;
    for (int j = 1; j <= 2; ++j) {
        const Network& self = j == 1 ? n1 : n2;
        const Execution a_j = alpha.project(self.names());
        const Execution b_j = alpha.project(self.external_names());
        rhs *= detail::cone_on(cc, beta_in, a_j.steps) / detail::cone_on(cc, beta_in, b_j.steps);
    }
    return std::abs(lhs - rhs);
}

double verify_hiding(const Network& net, const std::set<std::string>& hidden,
                     const EngineParams& params, const InputExecution& beta_in,
                     const Execution& beta_hidden) {
    const Network after = hide(net, hidden);
    check_composite_trace(after, beta_hidden);
    const double lhs = trace_probability(after, params, beta_in, beta_hidden);

    const int t = beta_hidden.length();
    const std::vector<std::string> v(hidden.begin(), hidden.end());
    const double combos = std::pow(2.0, static_cast<double>(v.size()) * (t + 1));
    if (combos > static_cast<double>(1 << 22))
        throw ModelError("verifier: too many hidden-column completions to enumerate");

    const detail::Compiled c0 = detail::compile(net, params.lambda);
    double total = 0.0;
    std::vector<FiringPattern> gamma(beta_hidden.steps.size());
    const auto build = [&](auto&& self, std::size_t s) -> void {
        if (s == gamma.size()) {
            total += detail::cone_on(c0, beta_in, gamma);
            return;
        }
        for (std::uint32_t pat = 0; pat < (1u << v.size()); ++pat) {
            std::vector<std::uint8_t> bits(v.size());
            for (std::size_t k = 0; k < v.size(); ++k)
                bits[k] = (pat >> k & 1u) ? 1 : 0;
            const auto merged =
                FiringPattern::merged(beta_hidden.steps[s], FiringPattern(v, bits));
            gamma[s] = *merged; // domains are disjoint, merge cannot fail
            self(self, s + 1);
        }
    };
    build(build, 0);
    return std::abs(lhs - total);
}

} // namespace snn
