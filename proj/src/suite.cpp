#include "snn/suite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <utility>

#include "engine_detail.hpp"
#include "snn/compose.hpp"
#include "snn/montecarlo.hpp"

namespace snn {
namespace {

using detail::Compiled;
using detail::TraceFilter;

int rand_int(SplitMix64& rng, int lo, int hi) { // inclusive bounds
    return lo + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1));
}

double rand_weight(SplitMix64& rng) {
    for (;;) {
        const double w = rng.u01() * 6.0 - 3.0;
        if (std::abs(w) >= 1e-3)
            return w;
    }
}

double rand_bias(SplitMix64& rng) { return rng.u01() * 4.0 - 2.0; }

// Take k distinct names from the pool, in random order.
std::vector<std::string> sample_names(SplitMix64& rng, std::vector<std::string> pool, int k) {
    for (int i = 0; i < k; ++i) {
        const int j = rand_int(rng, i, static_cast<int>(pool.size()) - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
}

Network build_network(SplitMix64& rng, const std::vector<std::string>& inputs,
                      const std::vector<std::string>& outputs,
                      const std::vector<std::string>& internals) {
    std::vector<NeuronSpec> specs;
    for (const auto& name : inputs)
        specs.push_back({name, NeuronClass::Input, 0.0, false});
    for (const auto& name : outputs)
        specs.push_back({name, NeuronClass::Output, rand_bias(rng), (rng.next() & 1) != 0});
    for (const auto& name : internals)
        specs.push_back({name, NeuronClass::Internal, rand_bias(rng), (rng.next() & 1) != 0});

    std::vector<std::string> all = inputs;
    all.insert(all.end(), outputs.begin(), outputs.end());
    all.insert(all.end(), internals.begin(), internals.end());
    std::vector<std::string> lc = outputs;
    lc.insert(lc.end(), internals.begin(), internals.end());

    std::vector<Edge> edges;
    for (const auto& from : all)
        for (const auto& to : lc)
            if (rng.next() & 1)
                edges.push_back({from, to, rand_weight(rng)});
    return Network(std::move(specs), std::move(edges));
}

} // namespace

Network random_network(std::uint64_t seed, int max_neurons, int max_outputs) {
    if (max_neurons < 1 || max_outputs < 1)
        throw ModelError("random network needs room for at least one output");
    SplitMix64 rng{seed};
    const int n_out = rand_int(rng, 1, std::min(max_outputs, max_neurons));
    const int n_int = rand_int(rng, 0, std::min(2, max_neurons - n_out));
    const int n_in = rand_int(rng, 0, max_neurons - n_out - n_int);

    std::vector<std::string> inputs, outputs, internals;
    for (int i = 1; i <= n_in; ++i)
        inputs.push_back("x" + std::to_string(i));
    for (int i = 1; i <= n_out; ++i)
        outputs.push_back("y" + std::to_string(i));
    for (int i = 1; i <= n_int; ++i)
        internals.push_back("v" + std::to_string(i));
    return build_network(rng, inputs, outputs, internals);
}

std::pair<Network, Network> random_pair(std::uint64_t seed, bool acyclic) {
    SplitMix64 rng{seed};

    const auto side_counts = [&rng](int& n_out, int& n_int, int& n_in) {
        n_out = rand_int(rng, 1, 2);
        n_int = rand_int(rng, 0, std::min(1, 3 - n_out));
        n_in = rand_int(rng, 0, 3 - n_out - n_int);
    };
    int ao, ai, an, bo, bi, bn;
    side_counts(ao, an, ai);
    side_counts(bo, bn, bi);

    std::vector<std::string> outs_a, outs_b, ints_a, ints_b;
    for (int i = 1; i <= ao; ++i)
        outs_a.push_back("pa" + std::to_string(i));
    for (int i = 1; i <= bo; ++i)
        outs_b.push_back("pb" + std::to_string(i));
    for (int i = 1; i <= an; ++i)
        ints_a.push_back("ka" + std::to_string(i));
    for (int i = 1; i <= bn; ++i)
        ints_b.push_back("kb" + std::to_string(i));

    // Input pools: fresh externals, one shareable external, and (where the
    // wiring direction allows it) the other side's outputs.
    std::vector<std::string> pool_a = {"ua1", "ua2", "sh1"};
    if (!acyclic)
        pool_a.insert(pool_a.end(), outs_b.begin(), outs_b.end());
    std::vector<std::string> pool_b = {"ub1", "ub2", "sh1"};
    pool_b.insert(pool_b.end(), outs_a.begin(), outs_a.end());

    const std::vector<std::string> ins_a = sample_names(rng, pool_a, ai);
    const std::vector<std::string> ins_b = sample_names(rng, pool_b, bi);

    Network a = build_network(rng, ins_a, outs_a, ints_a);
    Network b = build_network(rng, ins_b, outs_b, ints_b);
    const CompatibilityReport rep = compatible(a, b);
    if (!rep.ok)
        throw ModelError("random pair generation produced an incompatible pair");
    if (acyclic && !is_acyclic_composition(a, b))
        throw ModelError("random pair generation produced a cyclic pair");
    return {std::move(a), std::move(b)};
}

InputExecution random_input(std::uint64_t seed, const Network& net, int horizon) {
    SplitMix64 rng{seed};
    const std::vector<std::string> names = net.input_names();
    std::vector<std::vector<std::uint8_t>> rows(static_cast<std::size_t>(horizon) + 1,
                                                std::vector<std::uint8_t>(names.size(), 0));
    for (auto& row : rows)
        for (auto& bit : row)
            bit = static_cast<std::uint8_t>(rng.next() & 1);
    return InputExecution::make(names, std::move(rows), Extension::Zeros);
}

// ---------------------------------------------------------------------------
// Full-trace factorization over every composite trace, checked incrementally:
// one forward filter follows the composite, one follows each component under
// the inputs it sees inside the composition (composite externals cover every
// component input, so each row of the walk determines them).

namespace {

struct SideWalk {
    Compiled c;
    std::vector<int> in_ext_pos; // per input pos: column in the composite ext row
    std::vector<int> out_ext_pos; // per output pos: column in the composite ext row

    std::uint32_t out_pattern(std::uint32_t ext_row) const {
        std::uint32_t o = 0;
        for (std::size_t k = 0; k < out_ext_pos.size(); ++k)
            if (ext_row >> out_ext_pos[k] & 1u)
                o |= 1u << k;
        return o;
    }

    std::uint32_t fixed_now(std::uint32_t ext_row) const {
        std::uint32_t m = 0;
        for (std::size_t k = 0; k < in_ext_pos.size(); ++k)
            if (ext_row >> in_ext_pos[k] & 1u)
                m |= 1u << c.input_neuron[k];
        return m | c.lc_to_neuron_mask(out_pattern(ext_row) << c.n_int);
    }
};

struct FactorizationWalk {
    Compiled cc; // composite
    std::array<SideWalk, 2> side;
    const InputExecution* beta_in = nullptr;
    int horizon = 0;
    double max_resid = 0.0;

    void dfs(int t, std::uint32_t ext_row, std::uint32_t cur_out, const TraceFilter& fc,
             const TraceFilter& f0, const TraceFilter& f1) {
        max_resid = std::max(max_resid, std::abs(fc.total() - f0.total() * f1.total()));
        if (t == horizon)
            return;

        std::vector<double> ch_c, ch_0, ch_1;
        detail::trace_children(
            cc, fc, detail::input_bits(cc, *beta_in, t) | cc.lc_to_neuron_mask(cur_out << cc.n_int),
            ch_c);
        detail::trace_children(side[0].c, f0, side[0].fixed_now(ext_row), ch_0);
        detail::trace_children(side[1].c, f1, side[1].fixed_now(ext_row), ch_1);

        const std::uint32_t next_in = detail::input_bits(cc, *beta_in, t + 1);
        for (std::uint32_t o = 0; o < (1u << cc.n_out); ++o) {
            TraceFilter nc, n0, n1;
            detail::trace_select(cc, ch_c, o, nc);
            const std::uint32_t next_row = detail::ext_row_bits(cc, next_in, o);
            detail::trace_select(side[0].c, ch_0, side[0].out_pattern(next_row), n0);
            detail::trace_select(side[1].c, ch_1, side[1].out_pattern(next_row), n1);
            dfs(t + 1, next_row, o, nc, n0, n1);
        }
    }
};

std::vector<int> ext_positions(const Network& composite, const std::vector<std::string>& names) {
    const std::vector<std::string> ext = composite.external_names();
    std::vector<int> out;
    for (const auto& name : names) {
        const auto it = std::lower_bound(ext.begin(), ext.end(), name);
        if (it == ext.end() || *it != name)
            throw ModelError("component neuron '" + name + "' is not a composite external");
        out.push_back(static_cast<int>(it - ext.begin()));
    }
    return out;
}

} // namespace

SuiteReport acyclic_factorization_suite(int pairs, int horizon, std::uint64_t seed) {
    SuiteReport rep;
    EngineParams params;
    for (int i = 0; i < pairs; ++i) {
        const std::uint64_t s = substream_seed(seed, static_cast<std::uint64_t>(i));
        auto [a, b] = random_pair(s, /*acyclic=*/true);
        const Network composite = compose(a, b);
        const InputExecution beta_in = random_input(s ^ 1, composite, horizon);

        FactorizationWalk walk;
        walk.cc = detail::compile(composite, params.lambda);
        walk.side[0] = {detail::compile(a, params.lambda), ext_positions(composite, a.input_names()),
                        ext_positions(composite, a.output_names())};
        walk.side[1] = {detail::compile(b, params.lambda), ext_positions(composite, b.input_names()),
                        ext_positions(composite, b.output_names())};
        walk.beta_in = &beta_in;
        walk.horizon = horizon;

        const std::uint32_t out0 = walk.cc.f0 >> walk.cc.n_int;
        const std::uint32_t row0 =
            detail::ext_row_bits(walk.cc, detail::input_bits(walk.cc, beta_in, 0), out0);
        const TraceFilter fc = detail::trace_start(walk.cc, out0);
        const TraceFilter f0 =
            detail::trace_start(walk.side[0].c, walk.side[0].out_pattern(row0));
        const TraceFilter f1 =
            detail::trace_start(walk.side[1].c, walk.side[1].out_pattern(row0));
        walk.dfs(0, row0, out0, fc, f0, f1);

        ++rep.cases;
        if (walk.max_resid > rep.max_residual) {
            rep.max_residual = walk.max_resid;
            rep.worst_case = "pair " + std::to_string(i);
        }
    }
    return rep;
}

SuiteReport onestep_factorization_suite(int pairs, int horizon, std::uint64_t seed) {
    SuiteReport rep;
    EngineParams params;
    for (int i = 0; i < pairs; ++i) {
        const std::uint64_t s = substream_seed(seed, static_cast<std::uint64_t>(i));
        auto [a, b] = random_pair(s, /*acyclic=*/i % 2 == 0);
        const Network composite = compose(a, b);
        const InputExecution beta_in = random_input(s ^ 1, composite, horizon);
        SplitMix64 rng{s ^ 2};
        const int len = rand_int(rng, 1, horizon);
        const Execution alpha = sample_execution(composite, params, beta_in, len, s ^ 3);
        const Execution beta = alpha.project(composite.external_names());

        const double resid = verify_onestep_factorization(a, b, params, beta_in, beta);
        ++rep.cases;
        if (resid > rep.max_residual) {
            rep.max_residual = resid;
            rep.worst_case = "pair " + std::to_string(i);
        }
    }
    return rep;
}

SuiteReport onestep_identities_suite(int pairs, int horizon, std::uint64_t seed) {
    SuiteReport rep;
    EngineParams params;
    for (int i = 0; i < pairs; ++i) {
        const std::uint64_t s = substream_seed(seed, static_cast<std::uint64_t>(i));
        auto [a, b] = random_pair(s, /*acyclic=*/i % 2 == 0);
        const Network composite = compose(a, b);
        const InputExecution beta_in = random_input(s ^ 1, composite, horizon);
        SplitMix64 rng{s ^ 2};
        const int len = rand_int(rng, 1, horizon);
        const Execution alpha = sample_execution(composite, params, beta_in, len, s ^ 3);

        const std::array<double, 4> res =
            verify_onestep_factorization2(a, b, params, beta_in, alpha);
        ++rep.cases;
        for (std::size_t k = 0; k < res.size(); ++k)
            if (res[k] > rep.max_residual) {
                rep.max_residual = res[k];
                rep.worst_case = "pair " + std::to_string(i) + " identity " + std::to_string(k);
            }
    }
    return rep;
}

SuiteReport independence_suite(int composites, int horizon, std::uint64_t seed) {
    SuiteReport rep;
    EngineParams params;
    for (int i = 0; i < composites; ++i) {
        const std::uint64_t s = substream_seed(seed, static_cast<std::uint64_t>(i));
        auto [a, b] = random_pair(s, /*acyclic=*/i % 2 == 0);
        const Network composite = compose(a, b);
        const InputExecution beta_in = random_input(s ^ 1, composite, horizon);
        const Execution alpha = sample_execution(composite, params, beta_in, horizon, s ^ 3);

        const double resid = verify_execution_independence(a, b, params, beta_in, alpha);
        ++rep.cases;
        if (resid > rep.max_residual) {
            rep.max_residual = resid;
            rep.worst_case = "composite " + std::to_string(i);
        }
    }
    return rep;
}

Execution random_hidden_trace(std::uint64_t seed, const Network& net,
                              const std::set<std::string>& hidden, const InputExecution& beta_in,
                              int horizon) {
    SplitMix64 rng{seed};
    std::vector<std::string> kept;
    for (const auto& name : net.external_names())
        if (hidden.count(name) == 0)
            kept.push_back(name);
    Execution beta_hidden;
    for (int t = 0; t <= horizon; ++t) {
        std::vector<std::uint8_t> row(kept.size(), 0);
        const std::vector<std::uint8_t> in_row = beta_in.row(t);
        for (std::size_t k = 0; k < kept.size(); ++k) {
            const int idx = net.index(kept[k]);
            if (net.neuron(idx).cls == NeuronClass::Input) {
                const auto& ins = beta_in.inputs;
                const auto it = std::lower_bound(ins.begin(), ins.end(), kept[k]);
                row[k] = in_row[static_cast<std::size_t>(it - ins.begin())];
            } else {
                row[k] = t == 0 ? static_cast<std::uint8_t>(net.neuron(idx).init)
                                : static_cast<std::uint8_t>(rng.next() & 1);
            }
        }
        beta_hidden.steps.emplace_back(kept, std::move(row));
    }
    return beta_hidden;
}

SuiteReport hiding_suite(int cases, int horizon, std::uint64_t seed, int max_neurons) {
    SuiteReport rep;
    EngineParams params;
    for (int i = 0; i < cases; ++i) {
        const std::uint64_t s = substream_seed(seed, static_cast<std::uint64_t>(i));
        SplitMix64 rng{s};
        const Network net = random_network(s ^ 1, max_neurons, 2);
        const InputExecution beta_in = random_input(s ^ 2, net, horizon);

        const std::vector<std::string> outs = net.output_names();
        std::set<std::string> hidden;
        for (const auto& name : outs)
            if (rng.next() & 1)
                hidden.insert(name);
        if (hidden.empty())
            hidden.insert(outs[static_cast<std::size_t>(
                rand_int(rng, 0, static_cast<int>(outs.size()) - 1))]);

        const Execution beta_hidden = random_hidden_trace(s ^ 3, net, hidden, beta_in, horizon);
        const double resid = verify_hiding(net, hidden, params, beta_in, beta_hidden);
        ++rep.cases;
        if (resid > rep.max_residual) {
            rep.max_residual = resid;
            rep.worst_case = "case " + std::to_string(i);
        }
    }
    return rep;
}

SuiteReport equivalence_suite(int nets, int horizon, std::uint64_t seed, int max_neurons) {
    SuiteReport rep;
    EngineParams params;
    for (int i = 0; i < nets; ++i) {
        const std::uint64_t s = substream_seed(seed, static_cast<std::uint64_t>(i));
        const Network net = random_network(s ^ 1, max_neurons, 2);
        const InputExecution beta_in = random_input(s ^ 2, net, horizon);

        const BehaviorFingerprint fp = behavior(net, params, beta_in, horizon);
        const ConditionalFingerprint cf = behavior2(net, params, beta_in, horizon);

        const BehaviorFingerprint fp_rt = behavior_from_conditionals(cf);
        const ConditionalFingerprint cf_rt = conditionals_from_behavior(fp);

        double resid = max_entry_difference(fp, fp_rt);
        for (const auto& [key, value] : cf.entries) {
            const auto it = cf_rt.entries.find(key);
            resid = std::max(resid, std::abs(value - (it == cf_rt.entries.end() ? 0.0 : it->second)));
        }
        for (const auto& [key, value] : cf_rt.entries)
            if (cf.entries.find(key) == cf.entries.end())
                resid = std::max(resid, std::abs(value));

        ++rep.cases;
        if (resid > rep.max_residual) {
            rep.max_residual = resid;
            rep.worst_case = "net " + std::to_string(i);
        }
    }
    return rep;
}

} // namespace snn
