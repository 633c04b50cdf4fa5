#include "snn/prob.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "engine_detail.hpp"

namespace snn::detail {

// ---------------------------------------------------------------------------
// Compilation

Compiled compile(const Network& net, double lambda) {
    if (!(lambda > 0.0))
        throw ModelError("engine: lambda must be positive");
    if (const auto violations = validate_network(net); !violations.empty()) {
        std::string msg = "engine: network is not well formed:";
        for (const auto& v : violations)
            msg += "\n  [" + v.kind + "] " + v.detail;
        throw ModelError(msg);
    }
    if (net.size() > kMaxNeurons)
        throw ModelError("engine: more than " + std::to_string(kMaxNeurons) + " neurons");

    Compiled c;
    c.net = &net;
    c.lambda = lambda;
    c.n = net.size();
    c.n_in = static_cast<int>(net.input_indices().size());
    c.n_out = static_cast<int>(net.output_indices().size());
    c.n_int = static_cast<int>(net.internal_indices().size());
    c.n_lc = c.n_out + c.n_int;
    c.n_ext = c.n_in + c.n_out;

    c.lc_pos.assign(c.n, -1);
    for (int i : net.internal_indices()) {
        c.lc_pos[i] = static_cast<int>(c.lc_neuron.size());
        c.lc_neuron.push_back(i);
    }
    for (int i : net.output_indices()) {
        c.lc_pos[i] = static_cast<int>(c.lc_neuron.size());
        c.lc_neuron.push_back(i);
    }
    c.input_neuron = net.input_indices();
    c.ext_neuron = net.external_indices();

    c.in_edges.resize(c.n_lc);
    c.bias.resize(c.n_lc);
    for (int k = 0; k < c.n_lc; ++k) {
        const int i = c.lc_neuron[k];
        c.bias[k] = net.neuron(i).bias;
        for (const auto& [src, weight] : net.incoming(i))
            c.in_edges[k].push_back({src, weight});
        if (net.neuron(i).init)
            c.f0 |= 1u << k;
    }
    c.pscratch.resize(c.n_lc);
    return c;
}

const double* Compiled::probs(std::uint32_t cfg) const {
    double* out = pscratch.data();
    if (n <= kProbCacheBits && n_lc > 0) {
        if (ptab.empty()) {
            ptab.resize((std::size_t{1} << n) * static_cast<std::size_t>(n_lc));
            pfill.assign(std::size_t{1} << n, 0);
        }
        out = ptab.data() + static_cast<std::size_t>(cfg) * static_cast<std::size_t>(n_lc);
        if (pfill[cfg])
            return out;
        pfill[cfg] = 1;
    }
    for (int k = 0; k < n_lc; ++k) {
        double pot = -bias[k];
        for (const auto& [src, weight] : in_edges[k])
            if (cfg >> src & 1u)
                pot += weight;
        out[k] = pot;
    }
    // in-place is fine: both backends read each element before writing it
    kernels::active().sigmoid_batch(out, out, static_cast<std::size_t>(n_lc), 1.0 / lambda);
    return out;
}

void check_input_domain(const Network& net, const InputExecution& input) {
    if (input.inputs != net.input_names())
        throw ModelError("input execution does not cover exactly the network's input neurons");
}

std::uint32_t input_bits(const Compiled& c, const InputExecution& input, int t) {
    const auto row = input.row(t);
    std::uint32_t m = 0;
    for (std::size_t k = 0; k < row.size(); ++k)
        if (row[k])
            m |= 1u << c.input_neuron[k];
    return m;
}

// ---------------------------------------------------------------------------
// Trace filter

TraceFilter trace_start(const Compiled& c, std::uint32_t out0) {
    TraceFilter f;
    f.mass.assign(std::size_t{1} << c.n_int, 0.0);
    if (out0 != c.f0 >> c.n_int) {
        f.dead = true;
        return f;
    }
    f.mass[c.f0 & ((1u << c.n_int) - 1u)] = 1.0;
    return f;
}

void trace_children(const Compiled& c, const TraceFilter& f, std::uint32_t fixed_now,
                    std::vector<double>& children) {
    const std::size_t total = std::size_t{1} << c.n_lc;
    children.assign(total, 0.0);
    if (f.dead)
        return;
    const auto& K = kernels::active();
    static thread_local std::vector<double> expbuf;
    expbuf.resize(total);
    const std::uint32_t n_states = 1u << c.n_int;
    for (std::uint32_t j = 0; j < n_states; ++j) {
        const double m = f.mass[j];
        if (m == 0.0)
            continue;
        const double* p = c.probs(fixed_now | c.lc_to_neuron_mask(j));
        K.pattern_products(p, static_cast<std::size_t>(c.n_lc), expbuf.data());
        K.axpy(m, expbuf.data(), children.data(), total);
    }
}

void trace_select(const Compiled& c, const std::vector<double>& children, std::uint32_t out_pattern,
                  TraceFilter& into) {
    const std::size_t block = std::size_t{1} << c.n_int;
    const auto begin = children.begin() + static_cast<std::ptrdiff_t>(out_pattern * block);
    into.mass.assign(begin, begin + static_cast<std::ptrdiff_t>(block));
    into.dead = false;
}

// ---------------------------------------------------------------------------
// Cone filter

ConeFilter::ConeFilter(const Compiled& c, const InputExecution& input) : c_(&c), input_(&input) {}

void ConeFilter::reset(StepConstraint c0) {
    c0.values &= c0.mask;
    step_ = 0;
    now_ = c0;
    dead_ = (c_->f0 & c0.mask) != c0.values;
    free_bits_.clear();
    for (int k = 0; k < c_->n_lc; ++k)
        if (!(c0.mask >> k & 1u))
            free_bits_.push_back(k);
    mass_.assign(std::size_t{1} << free_bits_.size(), 0.0);
    if (dead_)
        return;
    std::uint32_t idx = 0;
    for (std::size_t j = 0; j < free_bits_.size(); ++j)
        if (c_->f0 >> free_bits_[j] & 1u)
            idx |= 1u << j;
    mass_[idx] = 1.0;
}

void ConeFilter::advance(StepConstraint next) {
    next.values &= next.mask;
    std::vector<int> free_next;
    for (int k = 0; k < c_->n_lc; ++k)
        if (!(next.mask >> k & 1u))
            free_next.push_back(k);
    if (static_cast<int>(free_next.size()) > kMaxFreeBits)
        throw ModelError("engine: filter state too large (too many unconstrained neurons)");
    if (dead_) {
        now_ = next;
        free_bits_ = std::move(free_next);
        mass_.assign(std::size_t{1} << free_bits_.size(), 0.0);
        ++step_;
        return;
    }

    const std::size_t knext = free_next.size();
    next_.assign(std::size_t{1} << knext, 0.0);
    const std::uint32_t in_mask = input_bits(*c_, *input_, step_);
    const auto& K = kernels::active();
    probbuf_.resize(knext);
    expbuf_.resize(std::size_t{1} << knext);

    for (std::size_t i = 0; i < mass_.size(); ++i) {
        const double m = mass_[i];
        if (m == 0.0)
            continue;
        std::uint32_t lc_now = now_.values;
        for (std::size_t j = 0; j < free_bits_.size(); ++j)
            if (i >> j & 1u)
                lc_now |= 1u << free_bits_[j];
        const double* p = c_->probs(in_mask | c_->lc_to_neuron_mask(lc_now));

        double fixed = 1.0;
        for (int k = 0; k < c_->n_lc; ++k)
            if (next.mask >> k & 1u)
                fixed *= (next.values >> k & 1u) ? p[k] : 1.0 - p[k];
        for (std::size_t j = 0; j < knext; ++j)
            probbuf_[j] = p[free_next[j]];
        K.pattern_products(probbuf_.data(), knext, expbuf_.data());
        K.axpy(m * fixed, expbuf_.data(), next_.data(), next_.size());
    }

    mass_.swap(next_);
    now_ = next;
    free_bits_ = std::move(free_next);
    ++step_;
}

double ConeFilter::total() const {
    if (dead_)
        return 0.0;
    return kernels::active().sum(mass_.data(), mass_.size());
}

// ---------------------------------------------------------------------------
// Keys

void key_append_row(std::string& key, std::uint32_t ext_row, int n_ext, int t) {
    if (t > 0)
        key += ';';
    for (int pos = 0; pos < n_ext; ++pos)
        key += (ext_row >> pos & 1u) ? '1' : '0';
}

std::string key_parent(const std::string& key, int n_ext) {
    const std::size_t row = static_cast<std::size_t>(n_ext) + 1;
    if (key.size() + 1 <= row)
        throw ModelError("trace key has no parent");
    return key.substr(0, key.size() - row);
}

int key_length(const std::string& key, int n_ext) {
    const std::size_t row = static_cast<std::size_t>(n_ext) + 1;
    return static_cast<int>((key.size() + 1) / row) - 1;
}

bool key_bit(const std::string& key, int n_ext, int t, int pos) {
    return key[static_cast<std::size_t>(t) * (static_cast<std::size_t>(n_ext) + 1) +
               static_cast<std::size_t>(pos)] == '1';
}

bool lc_constraint_at(const Compiled& c, const InputExecution& input, const FiringPattern& pat,
                      int t, StepConstraint& out) {
    const Network& net = *c.net;
    out = {};
    std::uint32_t in_mask = 0;
    bool in_mask_ready = false;
    for (std::size_t pos = 0; pos < pat.domain().size(); ++pos) {
        const int i = net.index(pat.domain()[pos]);
        const bool fired = pat.values()[pos] != 0;
        if (c.lc_pos[i] >= 0) {
            out.mask |= 1u << c.lc_pos[i];
            if (fired)
                out.values |= 1u << c.lc_pos[i];
        } else {
            if (!in_mask_ready) {
                in_mask = input_bits(c, input, t);
                in_mask_ready = true;
            }
            if (((in_mask >> i) & 1u) != (fired ? 1u : 0u))
                return false;
        }
    }
    return true;
}

double cone_on(const Compiled& c, const InputExecution& input,
               std::span<const FiringPattern> constraints) {
    if (constraints.empty())
        return 1.0;
    ConeFilter filter(c, input);
    StepConstraint sc;
    if (!lc_constraint_at(c, input, constraints[0], 0, sc))
        return 0.0;
    filter.reset(sc);
    for (std::size_t t = 1; t < constraints.size(); ++t) {
        if (!lc_constraint_at(c, input, constraints[t], static_cast<int>(t), sc))
            return 0.0;
        filter.advance(sc);
    }
    return filter.total();
}

std::uint32_t ext_row_bits(const Compiled& c, std::uint32_t in_mask_neurons,
                           std::uint32_t out_pattern) {
    std::uint32_t row = 0;
    for (int e = 0; e < c.n_ext; ++e) {
        const int i = c.ext_neuron[e];
        const bool fired = c.lc_pos[i] >= 0 ? (out_pattern >> (c.lc_pos[i] - c.n_int) & 1u) != 0
                                            : (in_mask_neurons >> i & 1u) != 0;
        if (fired)
            row |= 1u << e;
    }
    return row;
}

} // namespace snn::detail

// ===========================================================================

namespace snn {

using detail::Compiled;
using detail::ConeFilter;
using detail::StepConstraint;
using detail::TraceFilter;

// ---------------------------------------------------------------------------
// Trace keys

std::string trace_key(const Execution& trace) {
    std::string key;
    const int n_ext = static_cast<int>(trace.steps.empty() ? 0 : trace.steps.front().size());
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const auto& step = trace.steps[t];
        std::uint32_t row = 0;
        for (std::size_t pos = 0; pos < step.values().size(); ++pos)
            if (step.values()[pos])
                row |= 1u << pos;
        detail::key_append_row(key, row, n_ext, static_cast<int>(t));
    }
    return key;
}

std::string trace_key_parent(const std::string& key, int n_ext) {
    return detail::key_parent(key, n_ext);
}

int trace_key_length(const std::string& key, int n_ext) { return detail::key_length(key, n_ext); }

bool trace_key_bit(const std::string& key, int n_ext, int t, int pos) {
    return detail::key_bit(key, n_ext, t, pos);
}

Execution trace_from_key(const std::string& key, const std::vector<std::string>& externals) {
    const int n_ext = static_cast<int>(externals.size());
    const int len = detail::key_length(key, n_ext);
    Execution out;
    for (int t = 0; t <= len; ++t) {
        std::vector<std::uint8_t> v(externals.size());
        for (int pos = 0; pos < n_ext; ++pos)
            v[static_cast<std::size_t>(pos)] = detail::key_bit(key, n_ext, t, pos) ? 1 : 0;
        out.steps.emplace_back(externals, std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Simple probabilities

double transition_probability(const Network& net, const EngineParams& params,
                              const FiringPattern& prev, const FiringPattern& next_lc) {
    if (next_lc.domain() != net.lc_names())
        throw ModelError("transition: next pattern must cover exactly the output and internal neurons");
    double q = 1.0;
    for (const auto& name : next_lc.domain()) {
        const double p = firing_probability(potential(net, prev, name), params.lambda);
        q *= next_lc.value(name) ? p : 1.0 - p;
    }
    return q;
}

namespace {

void check_inputs_against_stream(const Execution& e, const InputExecution& input, int upto) {
    for (int t = 0; t <= upto; ++t) {
        const auto row = input.row(t);
        for (std::size_t k = 0; k < input.inputs.size(); ++k)
            if (e.steps[static_cast<std::size_t>(t)].value(input.inputs[k]) != (row[k] != 0))
                throw ModelError("inconsistent with the input execution at time " +
                                 std::to_string(t) + " on '" + input.inputs[k] + "'");
    }
}

} // namespace

double execution_probability(const Network& net, const EngineParams& params,
                             const InputExecution& input, const Execution& alpha) {
    detail::check_input_domain(net, input);
    if (alpha.steps.empty())
        throw ModelError("execution must be a non-empty sequence of patterns over all neurons");
    for (const auto& step : alpha.steps)
        if (step.domain() != net.names())
            throw ModelError("execution must be a non-empty sequence of patterns over all neurons");
    const Compiled c = detail::compile(net, params.lambda);
    check_inputs_against_stream(alpha, input, alpha.length());

    auto cfg_of = [&](const FiringPattern& p) {
        std::uint32_t m = 0;
        for (int i = 0; i < c.n; ++i)
            if (p.values()[static_cast<std::size_t>(i)])
                m |= 1u << i;
        return m;
    };
    const std::uint32_t cfg0 = cfg_of(alpha.steps.front());
    for (int k = 0; k < c.n_lc; ++k)
        if (((cfg0 >> c.lc_neuron[k]) & 1u) != ((c.f0 >> k) & 1u))
            throw ModelError("execution does not start from the initial configuration");

    double q = 1.0;
    for (int s = 0; s < alpha.length(); ++s) {
        const double* p = c.probs(cfg_of(alpha.steps[static_cast<std::size_t>(s)]));
        const std::uint32_t nxt = cfg_of(alpha.steps[static_cast<std::size_t>(s) + 1]);
        for (int k = 0; k < c.n_lc; ++k)
            q *= (nxt >> c.lc_neuron[k] & 1u) ? p[k] : 1.0 - p[k];
    }
    return q;
}

double cone_probability(const Network& net, const EngineParams& params, const InputExecution& input,
                        std::span<const FiringPattern> constraints) {
    detail::check_input_domain(net, input);
    if (constraints.empty())
        return 1.0;
    const Compiled c = detail::compile(net, params.lambda);
    return detail::cone_on(c, input, constraints);
}

double trace_probability(const Network& net, const EngineParams& params,
                         const InputExecution& input, const Execution& beta) {
    detail::check_input_domain(net, input);
    if (beta.steps.empty())
        throw ModelError("trace must be a non-empty sequence of patterns over the external neurons");
    for (const auto& step : beta.steps)
        if (step.domain() != net.external_names())
            throw ModelError("trace must be a non-empty sequence of patterns over the external neurons");
    check_inputs_against_stream(beta, input, beta.length());
    return cone_probability(net, params, input, beta.steps);
}

double conditional_probability(double numerator, double denominator) {
    if (!(denominator > 0.0))
        throw ModelError("conditional: denominator must be positive");
    return numerator / denominator;
}

// ---------------------------------------------------------------------------
// Public forward-filter state

struct TraceDistribution::Impl {
    Network net;
    InputExecution input;
    Compiled c;
    TraceFilter f;
    std::uint32_t cur_out = 0;
    std::vector<double> children;

    Impl(const Network& net_, double lambda, InputExecution input_)
        : net(net_), input(std::move(input_)), c(detail::compile(net, lambda)) {
        detail::check_input_domain(net, input);
    }

    std::uint32_t out_bits(const FiringPattern& pat) const {
        const auto names = net.output_names();
        if (pat.domain() != names)
            throw ModelError("trace filter: pattern must cover exactly the output neurons");
        std::uint32_t o = 0;
        for (std::size_t k = 0; k < names.size(); ++k)
            if (pat.values()[k])
                o |= 1u << k;
        return o;
    }
};

TraceDistribution::TraceDistribution(const Network& net, const EngineParams& params,
                                     InputExecution input, const FiringPattern& output0)
    : impl_(std::make_unique<Impl>(net, params.lambda, std::move(input))) {
    impl_->cur_out = impl_->out_bits(output0);
    impl_->f = detail::trace_start(impl_->c, impl_->cur_out);
}

TraceDistribution::~TraceDistribution() = default;

double TraceDistribution::total() const { return impl_->f.total(); }

double TraceDistribution::mass(const FiringPattern& internals) const {
    const auto names = impl_->net.internal_names();
    if (internals.domain() != names)
        throw ModelError("trace filter: pattern must cover exactly the internal neurons");
    if (impl_->f.dead)
        return 0.0;
    std::uint32_t j = 0;
    for (std::size_t k = 0; k < names.size(); ++k)
        if (internals.values()[k])
            j |= 1u << k;
    return impl_->f.mass[j];
}

void TraceDistribution::advance(const FiringPattern& next_outputs) {
    Impl& im = *impl_;
    const std::uint32_t next = im.out_bits(next_outputs);
    const std::uint32_t fixed =
        detail::input_bits(im.c, im.input, step_) | im.c.lc_to_neuron_mask(im.cur_out << im.c.n_int);
    if (im.f.dead) {
        ++step_;
        im.cur_out = next;
        return;
    }
    detail::trace_children(im.c, im.f, fixed, im.children);
    detail::trace_select(im.c, im.children, next, im.f);
    ++step_;
    im.cur_out = next;
}

// ---------------------------------------------------------------------------
// Enumeration over traces

namespace {

struct TraceWalk {
    const Compiled& c;
    const InputExecution& input;
    int horizon;
    std::vector<std::vector<double>> children; // per depth
    std::vector<std::uint32_t> in_rows; // neuron-bit input mask per step
    std::vector<std::uint32_t> out_path; // out-bit pattern per step

    TraceWalk(const Compiled& c_, const InputExecution& input_, int horizon_)
        : c(c_), input(input_), horizon(horizon_) {
        if (horizon_ < 0)
            throw ModelError("horizon must be non-negative");
        if (c.n_lc > detail::kMaxFreeBits)
            throw ModelError("engine: too many output/internal neurons to enumerate traces");
        children.resize(static_cast<std::size_t>(horizon_));
        in_rows.reserve(static_cast<std::size_t>(horizon_) + 1);
        for (int t = 0; t <= horizon_; ++t)
            in_rows.push_back(detail::input_bits(c, input, t));
        out_path.assign(static_cast<std::size_t>(horizon_) + 1, 0);
        out_path[0] = c.f0 >> c.n_int;
    }

    std::uint32_t fixed_at(int t) const {
        return in_rows[static_cast<std::size_t>(t)] |
               c.lc_to_neuron_mask(out_path[static_cast<std::size_t>(t)] << c.n_int);
    }
};

double expected_entries(int n_out, int horizon) {
    double total = 0.0, level = 1.0;
    for (int t = 0; t <= horizon; ++t) {
        total += level;
        level *= std::pow(2.0, n_out);
    }
    return total;
}

} // namespace

double event_probability(const Network& net, const EngineParams& params,
                         const InputExecution& input, int horizon,
                         const std::function<bool(const Execution&)>& predicate) {
    detail::check_input_domain(net, input);
    const Compiled c = detail::compile(net, params.lambda);
    if (expected_entries(c.n_out, horizon) > static_cast<double>(1 << 22))
        throw ModelError("engine: too many traces to enumerate at this horizon");
    TraceWalk w(c, input, horizon);
    const auto ext_names = net.external_names();

    Execution trace;
    trace.steps.reserve(static_cast<std::size_t>(horizon) + 1);

    double total = 0.0;
    auto leaf = [&](const TraceFilter& f) {
        trace.steps.clear();
        for (int t = 0; t <= horizon; ++t) {
            const std::uint32_t row =
                detail::ext_row_bits(w.c, w.in_rows[static_cast<std::size_t>(t)],
                                     w.out_path[static_cast<std::size_t>(t)]);
            std::vector<std::uint8_t> v(ext_names.size());
            for (std::size_t pos = 0; pos < v.size(); ++pos)
                v[pos] = (row >> pos & 1u) ? 1 : 0;
            trace.steps.emplace_back(ext_names, std::move(v));
        }
        if (predicate(trace))
            total += f.total();
    };

    auto rec = [&](auto&& self, const TraceFilter& f, int t) -> void {
        if (t == horizon) {
            leaf(f);
            return;
        }
        auto& kids = w.children[static_cast<std::size_t>(t)];
        detail::trace_children(c, f, w.fixed_at(t), kids);
        TraceFilter child;
        for (std::uint32_t o = 0; o < (1u << c.n_out); ++o) {
            detail::trace_select(c, kids, o, child);
            w.out_path[static_cast<std::size_t>(t) + 1] = o;
            self(self, child, t + 1);
        }
    };
    rec(rec, detail::trace_start(c, w.out_path[0]), 0);
    return total;
}

namespace {

// Shared walker for behavior()/behavior2(): visits every trace prefix.
template <typename Visit>
void walk_prefixes(const Compiled& c, const InputExecution& input, int horizon, Visit&& visit) {
    TraceWalk w(c, input, horizon);
    std::string key;
    detail::key_append_row(key, detail::ext_row_bits(c, w.in_rows[0], w.out_path[0]), c.n_ext, 0);

    auto rec = [&](auto&& self, const TraceFilter& f, double parent_total, int t) -> void {
        const double here = f.total();
        visit(key, here, parent_total, t);
        if (t == horizon)
            return;
        auto& kids = w.children[static_cast<std::size_t>(t)];
        detail::trace_children(c, f, w.fixed_at(t), kids);
        TraceFilter child;
        const std::size_t key_mark = key.size();
        for (std::uint32_t o = 0; o < (1u << c.n_out); ++o) {
            detail::trace_select(c, kids, o, child);
            w.out_path[static_cast<std::size_t>(t) + 1] = o;
            detail::key_append_row(
                key, detail::ext_row_bits(c, w.in_rows[static_cast<std::size_t>(t) + 1], o),
                c.n_ext, t + 1);
            self(self, child, here, t + 1);
            key.resize(key_mark);
        }
    };
    rec(rec, detail::trace_start(c, w.out_path[0]), 1.0, 0);
}

void check_enumerable(const Compiled& c, int horizon) {
    if (horizon < 0)
        throw ModelError("horizon must be non-negative");
    if (expected_entries(c.n_out, horizon) > static_cast<double>(1 << 21))
        throw ModelError("engine: fingerprint would be too large at this horizon");
}

} // namespace

BehaviorFingerprint behavior(const Network& net, const EngineParams& params,
                             const InputExecution& input, int horizon) {
    detail::check_input_domain(net, input);
    const Compiled c = detail::compile(net, params.lambda);
    check_enumerable(c, horizon);
    BehaviorFingerprint fp;
    fp.externals = net.external_names();
    fp.horizon = horizon;
    fp.lambda = params.lambda;
    fp.input = input;
    walk_prefixes(c, input, horizon, [&](const std::string& key, double p, double, int) {
        fp.entries.emplace(key, p);
    });
    return fp;
}

ConditionalFingerprint behavior2(const Network& net, const EngineParams& params,
                                 const InputExecution& input, int horizon) {
    detail::check_input_domain(net, input);
    const Compiled c = detail::compile(net, params.lambda);
    check_enumerable(c, horizon);
    ConditionalFingerprint fp;
    fp.externals = net.external_names();
    fp.horizon = horizon;
    fp.lambda = params.lambda;
    fp.input = input;
    walk_prefixes(c, input, horizon, [&](const std::string& key, double p, double parent, int t) {
        fp.entries.emplace(key, t == 0 ? 1.0 : p / parent);
    });
    return fp;
}

ConditionalFingerprint conditionals_from_behavior(const BehaviorFingerprint& fp) {
    ConditionalFingerprint out;
    out.externals = fp.externals;
    out.horizon = fp.horizon;
    out.lambda = fp.lambda;
    out.input = fp.input;
    const int n_ext = static_cast<int>(fp.externals.size());
    for (const auto& [key, p] : fp.entries) {
        if (detail::key_length(key, n_ext) == 0) {
            out.entries.emplace(key, 1.0);
            continue;
        }
        const auto parent = fp.entries.find(detail::key_parent(key, n_ext));
        if (parent == fp.entries.end())
            throw ModelError("fingerprint is missing the prefix of '" + key + "'");
        out.entries.emplace(key, conditional_probability(p, parent->second));
    }
    return out;
}

BehaviorFingerprint behavior_from_conditionals(const ConditionalFingerprint& fp) {
    BehaviorFingerprint out;
    out.externals = fp.externals;
    out.horizon = fp.horizon;
    out.lambda = fp.lambda;
    out.input = fp.input;
    const int n_ext = static_cast<int>(fp.externals.size());
    // std::map is ordered and a parent key is a strict prefix of its children,
    // so parents are always reconstructed first.
    for (const auto& [key, cond] : fp.entries) {
        if (detail::key_length(key, n_ext) == 0) {
            out.entries.emplace(key, cond);
            continue;
        }
        const auto parent = out.entries.find(detail::key_parent(key, n_ext));
        if (parent == out.entries.end())
            throw ModelError("conditional fingerprint is missing the prefix of '" + key + "'");
        out.entries.emplace(key, parent->second * cond);
    }
    return out;
}

BehaviorFingerprint marginalize(const BehaviorFingerprint& fp, const std::vector<std::string>& keep) {
    std::vector<std::string> kept = keep;
    std::sort(kept.begin(), kept.end());
    std::vector<int> positions;
    for (const auto& name : kept) {
        const auto it = std::find(fp.externals.begin(), fp.externals.end(), name);
        if (it == fp.externals.end())
            throw ModelError("marginalize: '" + name + "' is not an external neuron here");
        positions.push_back(static_cast<int>(it - fp.externals.begin()));
    }
    BehaviorFingerprint out;
    out.externals = kept;
    out.horizon = fp.horizon;
    out.lambda = fp.lambda;
    out.empirical = fp.empirical;
    {
        // restrict the input stream to the kept input columns
        std::vector<std::string> in_names;
        std::vector<int> in_cols;
        for (std::size_t k = 0; k < fp.input.inputs.size(); ++k)
            if (std::binary_search(kept.begin(), kept.end(), fp.input.inputs[k])) {
                in_names.push_back(fp.input.inputs[k]);
                in_cols.push_back(static_cast<int>(k));
            }
        std::vector<std::vector<std::uint8_t>> rows;
        for (const auto& row : fp.input.prefix) {
            std::vector<std::uint8_t> r;
            for (int col : in_cols)
                r.push_back(row[static_cast<std::size_t>(col)]);
            rows.push_back(std::move(r));
        }
        out.input = InputExecution::make(std::move(in_names), std::move(rows), fp.input.extension);
    }
    const int n_ext = static_cast<int>(fp.externals.size());
    const int n_new = static_cast<int>(kept.size());
    for (const auto& [key, p] : fp.entries) {
        const int len = detail::key_length(key, n_ext);
        std::string nk;
        for (int t = 0; t <= len; ++t) {
            std::uint32_t row = 0;
            for (int pos = 0; pos < n_new; ++pos)
                if (detail::key_bit(key, n_ext, t, positions[static_cast<std::size_t>(pos)]))
                    row |= 1u << pos;
            detail::key_append_row(nk, row, n_new, t);
        }
        out.entries[nk] += p;
    }
    return out;
}

double max_entry_difference(const BehaviorFingerprint& a, const BehaviorFingerprint& b) {
    double worst = 0.0;
    for (const auto& [key, va] : a.entries) {
        const auto it = b.entries.find(key);
        worst = std::max(worst, std::abs(va - (it == b.entries.end() ? 0.0 : it->second)));
    }
    for (const auto& [key, vb] : b.entries)
        if (!a.entries.count(key))
            worst = std::max(worst, std::abs(vb));
    return worst;
}

namespace {

nlohmann::json fingerprint_json_common(const std::vector<std::string>& externals, int horizon,
                                       double lambda, const InputExecution& input,
                                       const char* kind,
                                       const std::map<std::string, double>& entries) {
    nlohmann::json doc;
    doc["externals"] = externals;
    doc["horizon"] = horizon;
    doc["lambda"] = lambda;
    doc["input"] = nlohmann::json::parse(input_execution_to_json(input));
    doc["kind"] = kind;
    doc["entries"] = nlohmann::json::object();
    for (const auto& [k, v] : entries)
        doc["entries"][k] = v;
    return doc;
}

} // namespace

std::string fingerprint_to_json(const BehaviorFingerprint& fp, int indent) {
    return fingerprint_json_common(fp.externals, fp.horizon, fp.lambda, fp.input,
                                   fp.empirical ? "empirical" : "exact", fp.entries)
        .dump(indent);
}

std::string fingerprint_to_json(const ConditionalFingerprint& fp, int indent) {
    return fingerprint_json_common(fp.externals, fp.horizon, fp.lambda, fp.input, "conditional",
                                   fp.entries)
        .dump(indent);
}

} // namespace snn
