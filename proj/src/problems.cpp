#include "snn/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <unordered_map>
#include <utility>

namespace snn {
namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
        if (!out.empty())
            out += ",";
        out += s;
    }
    return out;
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<std::string> sorted_union(const std::vector<std::string>& a,
                                      const std::vector<std::string>& b) {
    std::vector<std::string> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<std::string> sorted_minus(const std::vector<std::string>& a,
                                      const std::vector<std::string>& b) {
    std::vector<std::string> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool contains(const std::vector<std::string>& sorted, const std::string& s) {
    return std::binary_search(sorted.begin(), sorted.end(), s);
}

int find_pos(const std::vector<std::string>& names, const std::string& s, const char* where) {
    auto it = std::find(names.begin(), names.end(), s);
    if (it == names.end())
        throw ModelError(std::string("neuron '") + s + "' missing from " + where);
    return static_cast<int>(it - names.begin());
}

std::vector<int> find_positions(const std::vector<std::string>& names,
                                const std::vector<std::string>& wanted, const char* where) {
    std::vector<int> out;
    out.reserve(wanted.size());
    for (const auto& s : wanted)
        out.push_back(find_pos(names, s, where));
    return out;
}

std::vector<std::string> indexed_names(const std::string& prefix, int n) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i)
        out.push_back(prefix + std::to_string(i));
    return sorted_unique(std::move(out));
}

void require_interface(const Problem& p) {
    if (!std::is_sorted(p.n_in.begin(), p.n_in.end()) ||
        !std::is_sorted(p.n_out.begin(), p.n_out.end()))
        throw ModelError("problem '" + p.name + "' interface is not in canonical order");
    for (const auto& s : p.n_in)
        if (contains(p.n_out, s))
            throw ModelError("problem '" + p.name + "' lists '" + s + "' as input and output");
}

// True when the selected input columns hold one fixed row through time
// `through`; that row comes back in `row0`.
bool stable_selected_input(const InputExecution& input, const std::vector<std::string>& names,
                           int through, std::vector<std::uint8_t>& row0) {
    const std::vector<int> pos = find_positions(input.inputs, names, "the input stream");
    row0.clear();
    for (int t = 0; t <= through; ++t) {
        const std::vector<std::uint8_t> full = input.row(t);
        std::vector<std::uint8_t> sel;
        sel.reserve(pos.size());
        for (int p : pos)
            sel.push_back(full[static_cast<std::size_t>(p)]);
        if (t == 0)
            row0 = std::move(sel);
        else if (sel != row0)
            return false;
    }
    return true;
}

constexpr double kFingerprintTol = 1e-9;
constexpr double kBoundSlack = 1e-12;

// Acceptance for singleton problems: the result must live on exactly the
// problem's externals and match the generated fingerprint entry by entry.

std::function<bool(const Result&, AcceptanceRecord&)> make_singleton_accept(
    std::function<BehaviorFingerprint(const InputExecution&, int)> gen,
    std::vector<std::string> externals) {
    return [gen = std::move(gen), externals = std::move(externals)](const Result& r,
                                                                    AcceptanceRecord& rec) {
        if (r.dist.externals != externals) {
            rec.note = "result domain {" + join(r.dist.externals) +
                       "} differs from the problem's externals {" + join(externals) +
                       "}; fingerprints are not comparable";
            return false;
        }
        const BehaviorFingerprint want = gen(r.input, r.dist.horizon);
        const double diff = max_entry_difference(r.dist, want);
        rec.achieved = diff;
        rec.required = kFingerprintTol;
        rec.note = "max fingerprint difference " + fmt(diff) + " (tolerance " +
                   fmt(kFingerprintTol) + ")";
        return diff <= kFingerprintTol;
    };
}

// Largest deviation of any one-step conditional from the product of the two
// marginal output-group conditionals given the same prefix. Zero (to
// roundoff) exactly when the result factors across the two output sets.
double factorization_residual(const BehaviorFingerprint& dist, const std::vector<std::string>& out1,
                              const std::vector<std::string>& out2) {
    const int n_ext = static_cast<int>(dist.externals.size());
    const std::vector<int> p1 = find_positions(dist.externals, out1, "the result fingerprint");
    const std::vector<int> p2 = find_positions(dist.externals, out2, "the result fingerprint");

    struct Child {
        std::uint32_t o1 = 0, o2 = 0;
        double value = 0.0;
    };
    std::unordered_map<std::string, std::vector<Child>> children;
    for (const auto& [key, value] : dist.entries) {
        const int len = trace_key_length(key, n_ext);
        if (len == 0)
            continue;
        Child c;
        c.value = value;
        for (std::size_t k = 0; k < p1.size(); ++k)
            if (trace_key_bit(key, n_ext, len, p1[k]))
                c.o1 |= 1u << k;
        for (std::size_t k = 0; k < p2.size(); ++k)
            if (trace_key_bit(key, n_ext, len, p2[k]))
                c.o2 |= 1u << k;
        children[trace_key_parent(key, n_ext)].push_back(c);
    }

    double worst = 0.0;
    for (const auto& [parent, kids] : children) {
        const auto it = dist.entries.find(parent);
        if (it == dist.entries.end() || it->second <= 0.0)
            continue;
        const double pv = it->second;
        std::map<std::uint32_t, double> s1, s2;
        for (const Child& c : kids) {
            s1[c.o1] += c.value;
            s2[c.o2] += c.value;
        }
        for (const Child& c : kids)
            worst = std::max(worst,
                             std::abs(c.value / pv - (s1[c.o1] / pv) * (s2[c.o2] / pv)));
    }
    return worst;
}

// The composed singleton generator: recursive one-step product of the two
// component generators, with each component driven by the input stream it
// would see inside the composition (composite inputs pass through, captured
// inputs replay the prefix and read 0 at the final step).
struct ComposedGenerator {
    std::vector<std::string> in1, out1, in2, out2;
    std::vector<std::string> comp_in, comp_out, comp_ext;
    std::function<BehaviorFingerprint(const InputExecution&, int)> gen1, gen2;

    struct Side {
        std::vector<std::string> inputs; // component input names, sorted
        std::vector<std::string> ext; // component externals, sorted
        std::vector<int> in_from_stream; // per input: index into comp_in, or -1 if captured
        std::vector<int> in_from_ext; // per input: index into comp_ext (captured value)
        std::vector<int> ext_from_comp; // per external: index into comp_ext
        std::vector<int> in_pos_in_ext; // per input: its column inside ext
        std::function<BehaviorFingerprint(const InputExecution&, int)> gen;
    };

    Side make_side(const std::vector<std::string>& ins, const std::vector<std::string>& outs,
                   std::function<BehaviorFingerprint(const InputExecution&, int)> gen) const {
        Side s;
        s.inputs = ins;
        s.ext = sorted_union(ins, outs);
        s.gen = std::move(gen);
        for (const auto& name : s.inputs) {
            const auto it = std::lower_bound(comp_in.begin(), comp_in.end(), name);
            if (it != comp_in.end() && *it == name) {
                s.in_from_stream.push_back(static_cast<int>(it - comp_in.begin()));
                s.in_from_ext.push_back(-1);
            } else {
                s.in_from_stream.push_back(-1);
                s.in_from_ext.push_back(find_pos(comp_ext, name, "the composed externals"));
            }
        }
        s.ext_from_comp = find_positions(comp_ext, s.ext, "the composed externals");
        s.in_pos_in_ext = find_positions(s.ext, s.inputs, "the component externals");
        return s;
    }

    static void append_row(std::string& key, const std::vector<std::uint8_t>& row) {
        if (!key.empty())
            key += ';';
        for (std::uint8_t b : row)
            key += b ? '1' : '0';
    }

    BehaviorFingerprint operator()(const InputExecution& beta_in, int horizon) const {
        if (beta_in.inputs != comp_in)
            throw ModelError("input stream names do not match the composed problem's inputs");
        if (horizon < 0)
            throw ModelError("horizon must be non-negative");

        const Side sides[2] = {make_side(in1, out1, gen1), make_side(in2, out2, gen2)};
        const int n_ext = static_cast<int>(comp_ext.size());
        const std::vector<int> out_pos =
            find_positions(comp_ext, comp_out, "the composed externals");
        const std::vector<int> in_pos = find_positions(comp_ext, comp_in, "the composed externals");
        const int n_out = static_cast<int>(comp_out.size());

        // Rows the components' derived input streams take at each time: the
        // composite stream where the name passes through, the prefix value
        // where it is captured (filled per trace below), 0 at the last step.
        struct Node {
            std::vector<std::vector<std::uint8_t>> rows; // composite external rows
            std::string key;
            double value = 1.0;
        };

        BehaviorFingerprint fp;
        fp.externals = comp_ext;
        fp.horizon = horizon;
        fp.input = beta_in;
        fp.empirical = false;

        // Base: probability 1 on the row combining the composite inputs at
        // time 0 with both components' initial outputs (read off each
        // component's length-0 fingerprint).
        std::vector<std::uint8_t> row0(static_cast<std::size_t>(n_ext), 0);
        {
            const std::vector<std::uint8_t> in_row = beta_in.row(0);
            for (std::size_t k = 0; k < comp_in.size(); ++k)
                row0[static_cast<std::size_t>(in_pos[k])] = in_row[k];
        }
        bool lambda_set = false;
        for (const Side& s : sides) {
            std::vector<std::uint8_t> derived_row(s.inputs.size(), 0);
            for (std::size_t k = 0; k < s.inputs.size(); ++k)
                if (s.in_from_stream[k] >= 0)
                    derived_row[k] = beta_in.row(0)[static_cast<std::size_t>(s.in_from_stream[k])];
            const InputExecution derived0 =
                s.inputs.empty()
                    ? InputExecution::zeros({})
                    : InputExecution::make(s.inputs, {derived_row}, Extension::Zeros);
            const BehaviorFingerprint base = s.gen(derived0, 0);
            if (!lambda_set) {
                fp.lambda = base.lambda;
                lambda_set = true;
            }
            if (base.entries.size() != 1)
                throw ModelError("component generator did not produce a unique initial trace");
            const std::string& key0 = base.entries.begin()->first;
            const int side_ext = static_cast<int>(s.ext.size());
            for (int k = 0; k < side_ext; ++k) {
                const std::string& name = s.ext[static_cast<std::size_t>(k)];
                if (contains(comp_out, name) && trace_key_bit(key0, side_ext, 0, k))
                    row0[static_cast<std::size_t>(
                        find_pos(comp_ext, name, "the composed externals"))] = 1;
            }
        }

        Node root;
        root.rows.push_back(row0);
        append_row(root.key, row0);
        fp.entries[root.key] = 1.0;

        // Memoized component fingerprints keyed by the serialized derived
        // input prefix (the only part that varies across traces).
        std::unordered_map<std::string, BehaviorFingerprint> cache[2];

        std::vector<Node> frontier{std::move(root)};
        for (int t = 1; t <= horizon; ++t) {
            const std::vector<std::uint8_t> in_row_t = beta_in.row(t);
            std::vector<Node> next;
            next.reserve(frontier.size() << n_out);
            for (const Node& node : frontier) {
                // Derived streams, denominators and fingerprints per side.
                const BehaviorFingerprint* side_fp[2];
                std::string den_key[2];
                double den[2];
                std::vector<std::uint8_t> derived_last[2];
                for (int j = 0; j < 2; ++j) {
                    const Side& s = sides[j];
                    std::vector<std::vector<std::uint8_t>> rows(
                        static_cast<std::size_t>(t) + 1,
                        std::vector<std::uint8_t>(s.inputs.size(), 0));
                    for (int u = 0; u <= t; ++u)
                        for (std::size_t k = 0; k < s.inputs.size(); ++k) {
                            if (s.in_from_stream[k] >= 0)
                                rows[static_cast<std::size_t>(u)][k] = beta_in.row(u)
                                    [static_cast<std::size_t>(s.in_from_stream[k])];
                            else if (u < t)
                                rows[static_cast<std::size_t>(u)][k] =
                                    node.rows[static_cast<std::size_t>(u)]
                                             [static_cast<std::size_t>(s.in_from_ext[k])];
                        }
                    derived_last[j] = rows.back();
                    std::string memo = std::to_string(t);
                    for (const auto& r : rows) {
                        memo += ';';
                        for (std::uint8_t b : r)
                            memo += b ? '1' : '0';
                    }
                    auto [it, fresh] = cache[j].try_emplace(memo);
                    if (fresh) {
                        const InputExecution derived =
                            s.inputs.empty()
                                ? InputExecution::zeros({})
                                : InputExecution::make(s.inputs, rows, Extension::Zeros);
                        it->second = s.gen(derived, t);
                    }
                    side_fp[j] = &it->second;

                    std::string dk;
                    for (int u = 0; u < t; ++u) {
                        std::vector<std::uint8_t> row(s.ext.size());
                        for (std::size_t k = 0; k < s.ext.size(); ++k)
                            row[k] = node.rows[static_cast<std::size_t>(u)]
                                              [static_cast<std::size_t>(s.ext_from_comp[k])];
                        append_row(dk, row);
                    }
                    den_key[j] = dk;
                    const auto dit = side_fp[j]->entries.find(dk);
                    if (dit == side_fp[j]->entries.end() || dit->second <= 0.0)
                        throw ModelError(
                            "component generator assigns no mass to an observed prefix");
                    den[j] = dit->second;
                }

                for (std::uint32_t o = 0; o < (1u << n_out); ++o) {
                    std::vector<std::uint8_t> row_t(static_cast<std::size_t>(n_ext), 0);
                    for (std::size_t k = 0; k < comp_in.size(); ++k)
                        row_t[static_cast<std::size_t>(in_pos[k])] = in_row_t[k];
                    for (int k = 0; k < n_out; ++k)
                        if (o & (1u << k))
                            row_t[static_cast<std::size_t>(out_pos[static_cast<std::size_t>(k)])] = 1;

                    double step = 1.0;
                    for (int j = 0; j < 2 && step > 0.0; ++j) {
                        const Side& s = sides[j];
                        // Last row of the component trace: inputs as the
                        // derived stream reads them, outputs as proposed.
                        std::vector<std::uint8_t> last(s.ext.size(), 0);
                        for (std::size_t k = 0; k < s.ext.size(); ++k)
                            last[k] = row_t[static_cast<std::size_t>(s.ext_from_comp[k])];
                        for (std::size_t k = 0; k < s.inputs.size(); ++k)
                            last[static_cast<std::size_t>(s.in_pos_in_ext[k])] =
                                derived_last[j][k];
                        std::string nk = den_key[j];
                        append_row(nk, last);
                        const auto nit = side_fp[j]->entries.find(nk);
                        if (nit == side_fp[j]->entries.end())
                            throw ModelError(
                                "component generator fingerprint is missing a one-step extension");
                        step *= nit->second / den[j];
                    }

                    Node child;
                    child.rows = node.rows;
                    child.rows.push_back(row_t);
                    child.key = node.key;
                    append_row(child.key, row_t);
                    child.value = node.value * step;
                    fp.entries[child.key] = child.value;
                    next.push_back(std::move(child));
                }
            }
            frontier = std::move(next);
        }
        return fp;
    }
};

} // namespace

Verdict solves(const Network& net, const EngineParams& params, const Problem& prob,
               const std::vector<InputExecution>& inputs, int horizon, SolveMode mode,
               const TrialConfig& cfg) {
    if (!prob.accept)
        throw ModelError("problem '" + prob.name + "' has no acceptance predicate");
    if (net.input_names() != prob.n_in || net.output_names() != prob.n_out)
        throw ModelError("network interface (in: {" + join(net.input_names()) + "}, out: {" +
                         join(net.output_names()) + "}) does not match problem '" + prob.name +
                         "' (in: {" + join(prob.n_in) + "}, out: {" + join(prob.n_out) + "})");
    if (horizon < prob.min_horizon)
        throw ModelError("horizon " + std::to_string(horizon) + " is below problem '" + prob.name +
                         "' minimum " + std::to_string(prob.min_horizon));

    Verdict v;
    v.solved = true;
    for (const InputExecution& input : inputs) {
        Result r;
        r.input = input;
        r.dist = mode == SolveMode::Exact ? behavior(net, params, input, horizon)
                                          : empirical_fingerprint(net, params, input, horizon, cfg);
        AcceptanceRecord rec;
        rec.input = input;
        rec.pass = prob.accept(r, rec);
        v.solved = v.solved && rec.pass;
        v.records.push_back(std::move(rec));
    }
    return v;
}

Problem exact_behavior_problem(std::string name, Network net, const EngineParams& params) {
    auto shared = std::make_shared<const Network>(std::move(net));
    Problem p;
    p.name = std::move(name);
    p.n_in = shared->input_names();
    p.n_out = shared->output_names();
    p.min_horizon = 0;
    p.generator = [shared, params](const InputExecution& input, int horizon) {
        return behavior(*shared, params, input, horizon);
    };
    p.accept = make_singleton_accept(p.generator, shared->external_names());
    return p;
}

Problem copy_problem(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw ModelError("copy problem needs delta in (0,1)");
    Problem p;
    p.name = "copy(delta=" + fmt(delta) + ")";
    p.n_in = {"x"};
    p.n_out = {"y"};
    p.min_horizon = 1;
    p.accept = [delta](const Result& r, AcceptanceRecord& rec) {
        const int n_ext = static_cast<int>(r.dist.externals.size());
        const int px = find_pos(r.dist.externals, "x", "the result fingerprint");
        const int py = find_pos(r.dist.externals, "y", "the result fingerprint");
        std::unordered_map<std::string, double> copied;
        for (const auto& [key, value] : r.dist.entries) {
            const int len = trace_key_length(key, n_ext);
            if (len == 0)
                continue;
            if (trace_key_bit(key, n_ext, len, py) == trace_key_bit(key, n_ext, len - 1, px))
                copied[trace_key_parent(key, n_ext)] += value;
        }
        double min_cond = 1.0;
        bool any = false;
        for (const auto& [key, value] : r.dist.entries) {
            if (trace_key_length(key, n_ext) >= r.dist.horizon || value <= 0.0)
                continue;
            const auto it = copied.find(key);
            min_cond = std::min(min_cond, it == copied.end() ? 0.0 : it->second / value);
            any = true;
        }
        rec.achieved = any ? min_cond : 1.0;
        rec.required = 1.0 - delta;
        rec.note = "min one-step copy conditional " + fmt(rec.achieved) + " vs required " +
                   fmt(rec.required);
        return rec.achieved >= rec.required - kBoundSlack;
    };
    return p;
}

Problem trivial_problem(std::vector<std::string> n_in, std::vector<std::string> n_out) {
    Problem p;
    p.name = "trivial";
    p.n_in = sorted_unique(std::move(n_in));
    p.n_out = sorted_unique(std::move(n_out));
    p.min_horizon = 0;
    p.accept = [](const Result&, AcceptanceRecord& rec) {
        rec.note = "unconstrained";
        return true;
    };
    require_interface(p);
    return p;
}

Problem problem_compose(const Problem& r1, const Problem& r2) {
    require_interface(r1);
    require_interface(r2);
    for (const auto& s : r1.n_out)
        if (contains(r2.n_out, s))
            throw ModelError("problems '" + r1.name + "' and '" + r2.name +
                             "' share output '" + s + "'");

    Problem p;
    p.name = "compose(" + r1.name + ", " + r2.name + ")";
    p.n_out = sorted_union(r1.n_out, r2.n_out);
    p.n_in = sorted_minus(sorted_union(r1.n_in, r2.n_in), p.n_out);
    p.min_horizon = std::max(r1.min_horizon, r2.min_horizon);

    if (r1.generator && r2.generator) {
        ComposedGenerator cg;
        cg.in1 = r1.n_in;
        cg.out1 = r1.n_out;
        cg.in2 = r2.n_in;
        cg.out2 = r2.n_out;
        cg.comp_in = p.n_in;
        cg.comp_out = p.n_out;
        cg.comp_ext = sorted_union(p.n_in, p.n_out);
        cg.gen1 = r1.generator;
        cg.gen2 = r2.generator;
        p.generator = cg;
        p.accept = make_singleton_accept(p.generator, cg.comp_ext);
        return p;
    }

    p.accept = [r1, r2](const Result& r, AcceptanceRecord& rec) {
        AcceptanceRecord rec1, rec2;
        rec1.input = r.input;
        rec2.input = r.input;
        const bool pass1 = r1.accept(r, rec1);
        const bool pass2 = r2.accept(r, rec2);
        bool pass = pass1 && pass2;
        std::string note = "[" + r1.name + "] " + rec1.note + "; [" + r2.name + "] " + rec2.note;
        if (!r.dist.empirical) {
            const double resid = factorization_residual(r.dist, r1.n_out, r2.n_out);
            note += "; one-step factorization residual " + fmt(resid) + " (tolerance " +
                    fmt(kFingerprintTol) + ")";
            pass = pass && resid <= kFingerprintTol;
        } else {
            note += "; factorization residual not checked on empirical results";
        }
        rec.note = std::move(note);
        return pass;
    };
    return p;
}

Problem problem_hide(const Problem& r, const std::set<std::string>& hidden) {
    if (hidden.empty())
        return r;
    for (const auto& s : hidden)
        if (!contains(r.n_out, s))
            throw ModelError("cannot hide '" + s + "': not an output of problem '" + r.name + "'");
    if (r.hide_impl)
        return r.hide_impl(r, hidden);
    if (r.generator) {
        Problem p;
        p.name = "hide(" + r.name + ")";
        p.n_in = r.n_in;
        p.n_out = r.n_out;
        std::erase_if(p.n_out, [&](const std::string& s) { return hidden.count(s) != 0; });
        p.min_horizon = r.min_horizon;
        const std::vector<std::string> keep = sorted_union(p.n_in, p.n_out);
        p.generator = [g = r.generator, keep](const InputExecution& input, int horizon) {
            return marginalize(g(input, horizon), keep);
        };
        p.accept = make_singleton_accept(p.generator, keep);
        return p;
    }
    throw ModelError("problem '" + r.name + "' has no hiding restatement");
}

Problem wta_problem(int n, double delta, int t_c, int t_s) {
    if (n < 1 || t_c < 1 || t_s < 1 || !(delta > 0.0 && delta < 1.0))
        throw ModelError("winner-take-all problem needs n,t_c,t_s >= 1 and delta in (0,1)");
    const std::vector<std::string> xs = indexed_names("x", n);
    const std::vector<std::string> ys = indexed_names("y", n);

    Problem p;
    p.name = "wta(n=" + std::to_string(n) + ",delta=" + fmt(delta) + ",t_c=" + std::to_string(t_c) +
             ",t_s=" + std::to_string(t_s) + ")";
    p.n_in = xs;
    p.n_out = ys;
    p.min_horizon = t_c + t_s - 1;
    p.accept = [n, delta, t_c, t_s, xs, ys](const Result& r, AcceptanceRecord& rec) {
        std::vector<std::uint8_t> xrow;
        if (!stable_selected_input(r.input, xs, r.dist.horizon, xrow)) {
            rec.note = "input stream not stable over the horizon: unconstrained";
            return true;
        }
        std::vector<int> firing;
        for (int i = 0; i < n; ++i)
            if (xrow[static_cast<std::size_t>(i)])
                firing.push_back(i);
        if (firing.empty()) {
            rec.note = "stable input with no firing neuron: unconstrained";
            return true;
        }

        const int n_ext = static_cast<int>(r.dist.externals.size());
        const std::vector<int> ypos = find_positions(r.dist.externals, ys, "the result fingerprint");
        const auto is_sole_winner = [&](const std::string& key, int t, int winner) {
            for (int k = 0; k < n; ++k)
                if (trace_key_bit(key, n_ext, t, ypos[static_cast<std::size_t>(k)]) !=
                    (k == winner))
                    return false;
            return true;
        };

        double mass = 0.0;
        for (const auto& [key, value] : r.dist.entries) {
            if (trace_key_length(key, n_ext) != r.dist.horizon)
                continue;
            bool ok = false;
            for (int t = 0; t <= t_c && !ok; ++t)
                for (int i : firing) {
                    bool window = true;
                    for (int s = t; s < t + t_s && window; ++s)
                        window = is_sole_winner(key, s, i);
                    if (window) {
                        ok = true;
                        break;
                    }
                }
            if (ok)
                mass += value;
        }
        rec.achieved = mass;
        rec.required = 1.0 - delta;
        rec.note = "single-winner stabilization mass " + fmt(mass) + " vs required " +
                   fmt(rec.required);
        return mass >= rec.required - kBoundSlack;
    };
    return p;
}

Problem filter_problem(int n, double delta) {
    if (n < 1 || !(delta > 0.0 && delta < 1.0))
        throw ModelError("filter problem needs n >= 1 and delta in (0,1)");
    const std::vector<std::string> ws = indexed_names("w", n);
    const std::vector<std::string> ys = indexed_names("y", n);
    const std::vector<std::string> zs = indexed_names("z", n);

    Problem p;
    p.name = "filter(n=" + std::to_string(n) + ",delta=" + fmt(delta) + ")";
    p.n_in = sorted_union(ws, ys);
    p.n_out = zs;
    p.min_horizon = 1;
    p.accept = [n, delta, ws, ys, zs](const Result& r, AcceptanceRecord& rec) {
        const int n_ext = static_cast<int>(r.dist.externals.size());
        const std::vector<int> wp = find_positions(r.dist.externals, ws, "the result fingerprint");
        const std::vector<int> yp = find_positions(r.dist.externals, ys, "the result fingerprint");
        const std::vector<int> zp = find_positions(r.dist.externals, zs, "the result fingerprint");

        std::unordered_map<std::string, double> correct;
        for (const auto& [key, value] : r.dist.entries) {
            const int len = trace_key_length(key, n_ext);
            if (len == 0)
                continue;
            bool ok = true;
            for (int i = 0; i < n && ok; ++i) {
                const bool want =
                    trace_key_bit(key, n_ext, len - 1, wp[static_cast<std::size_t>(i)]) &&
                    trace_key_bit(key, n_ext, len - 1, yp[static_cast<std::size_t>(i)]);
                ok = trace_key_bit(key, n_ext, len, zp[static_cast<std::size_t>(i)]) == want;
            }
            if (ok)
                correct[trace_key_parent(key, n_ext)] += value;
        }

        double min_cond = 1.0;
        bool any = false;
        for (const auto& [key, value] : r.dist.entries) {
            if (trace_key_length(key, n_ext) >= r.dist.horizon || value <= 0.0)
                continue;
            const auto it = correct.find(key);
            min_cond = std::min(min_cond, it == correct.end() ? 0.0 : it->second / value);
            any = true;
        }
        rec.achieved = any ? min_cond : 1.0;
        rec.required = std::pow(1.0 - delta, n);
        rec.note = "min conditional of the correct filter row " + fmt(rec.achieved) +
                   " vs required " + fmt(rec.required);
        return rec.achieved >= rec.required - kBoundSlack;
    };
    return p;
}

Problem attention_problem(int n, double delta, int t_c, int t_s,
                          std::pair<double, double> split) {
    const auto [d1, d2] = split;
    if (!(delta > 0.0 && delta < 1.0) || !(d1 > 0.0 && d1 < 1.0) || !(d2 > 0.0 && d2 < 1.0))
        throw ModelError("attention problem needs error rates in (0,1)");
    const double recomposed = 1.0 - (1.0 - d1) * std::pow(1.0 - d2, t_s);
    if (std::abs((1.0 - delta) - (1.0 - recomposed)) > 1e-12)
        throw ModelError("attention error split is inconsistent: 1-delta = " + fmt(1.0 - delta) +
                         " but (1-delta1)*(1-delta2)^t_s = " + fmt(1.0 - recomposed));

    Problem p = problem_compose(wta_problem(n, d1, t_c, t_s), filter_problem(n, d2));
    p.name = "attention(n=" + std::to_string(n) + ",delta=" + fmt(delta) +
             ",t_c=" + std::to_string(t_c) + ",t_s=" + std::to_string(t_s) + ")";
    p.min_horizon = t_c + t_s;
    p.hide_impl = [n, delta, t_c, t_s](const Problem& self, const std::set<std::string>& hidden) {
        const std::vector<std::string> ys = indexed_names("y", n);
        if (std::vector<std::string>(hidden.begin(), hidden.end()) != ys)
            throw ModelError("attention problem only knows how to hide exactly its y outputs");
        const std::vector<std::string> xs = indexed_names("x", n);
        const std::vector<std::string> ws = indexed_names("w", n);
        const std::vector<std::string> zs = indexed_names("z", n);

        Problem h;
        h.name = "hide(" + self.name + ")";
        h.n_in = self.n_in;
        h.n_out = zs;
        h.min_horizon = t_c + t_s;
        h.accept = [n, delta, t_c, t_s, xs, ws, zs](const Result& r, AcceptanceRecord& rec) {
            std::vector<std::uint8_t> xrow;
            if (!stable_selected_input(r.input, xs, r.dist.horizon, xrow)) {
                rec.note = "attention inputs not stable over the horizon: unconstrained";
                return true;
            }
            std::vector<int> firing;
            for (int i = 0; i < n; ++i)
                if (xrow[static_cast<std::size_t>(i)])
                    firing.push_back(i);
            if (firing.empty()) {
                rec.note = "stable input with no firing neuron: unconstrained";
                return true;
            }

            const int n_ext = static_cast<int>(r.dist.externals.size());
            const std::vector<int> wp =
                find_positions(r.dist.externals, ws, "the result fingerprint");
            const std::vector<int> zp =
                find_positions(r.dist.externals, zs, "the result fingerprint");

            double mass = 0.0;
            for (const auto& [key, value] : r.dist.entries) {
                if (trace_key_length(key, n_ext) != r.dist.horizon)
                    continue;
                bool ok = false;
                for (int t = 0; t <= t_c && !ok; ++t)
                    for (int i : firing) {
                        bool window = true;
                        for (int s = t + 1; s <= t + t_s && window; ++s)
                            for (int k = 0; k < n && window; ++k) {
                                const bool want =
                                    k == i && trace_key_bit(key, n_ext, s - 1,
                                                            wp[static_cast<std::size_t>(k)]);
                                window = trace_key_bit(key, n_ext, s,
                                                       zp[static_cast<std::size_t>(k)]) == want;
                            }
                        if (window) {
                            ok = true;
                            break;
                        }
                    }
                if (ok)
                    mass += value;
            }
            rec.achieved = mass;
            rec.required = 1.0 - delta;
            rec.note = "mirror-the-winner mass " + fmt(mass) + " vs required " + fmt(rec.required);
            return mass >= rec.required - kBoundSlack;
        };
        return h;
    };
    return p;
}

} // namespace snn
