#include "snn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snn/builders.hpp"
#include "snn/compose.hpp"
#include "snn/core.hpp"
#include "snn/montecarlo.hpp"
#include "snn/prob.hpp"
#include "snn/problems.hpp"
#include "snn/suite.hpp"

namespace snn::cli {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ModelError("cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Network load_network(const std::string& path) { return network_from_json(read_file(path)); }

InputExecution load_input(const std::string& path) {
    return input_execution_from_json(read_file(path));
}

Execution load_execution(const std::string& path) { return execution_from_json(read_file(path)); }

json as_json(const InputExecution& in) { return json::parse(input_execution_to_json(in)); }

// Options shared by groups of commands, filled during parsing.
struct Options {
    // build
    std::string builder;
    double delta = 0.1;
    double lambda = 1.0;
    int k = 2;
    int n = 2;
    double gamma = kDefaultWtaGamma;
    bool x1_init = true;
    bool x2_init = false;

    // file arguments
    std::string net_path, net2_path;
    std::string input_path, trace_path;
    std::vector<std::string> names; // hide targets / verify --hide
    std::vector<std::string> input_paths; // check --input (repeatable)

    // prob / simulate / check / verify
    bool conditional = false;
    int horizon = -1;
    long long trials = 100000;
    std::uint64_t seed = 0;
    double confidence = TrialConfig{}.confidence;
    std::string lemma;
    int random_cases = 50;
    int max_neurons = 4;
    double tol = -1.0;
    std::string problem;
    double delta1 = -1.0, delta2 = -1.0;
    int t_c = 4, t_s = 2;
    bool hide_y = false;
    std::string mode = "exact";
};

int do_build(const Options& o, std::ostream& out) {
    const GateParams p{o.delta, o.lambda};
    Network net;
    if (o.builder == "identity")
        net = identity_gate(p);
    else if (o.builder == "and")
        net = and_gate(o.k, p);
    else if (o.builder == "or")
        net = or_gate(o.k, p);
    else if (o.builder == "not")
        net = not_gate(p);
    else if (o.builder == "xor")
        net = xor_circuit(p);
    else if (o.builder == "wta")
        net = wta_network(o.n, o.gamma);
    else if (o.builder == "filter")
        net = filter_network(o.n, p);
    else if (o.builder == "attention")
        net = attention_network(o.n, o.gamma, p);
    else // "cyclic-toy", guarded by the option validator
        net = cyclic_toy(p, o.x1_init, o.x2_init).composite;
    out << network_to_json(net) << "\n";
    return 0;
}

int do_compose(const Options& o, std::ostream& out) {
    const Network a = load_network(o.net_path);
    const Network b = load_network(o.net2_path);
    const CompatibilityReport rep = compatible(a, b);
    if (!rep.ok) {
        json doc;
        doc["error"] = "incompatible";
        doc["reasons"] = rep.reasons;
        out << doc.dump(2) << "\n";
        return 2;
    }
    out << network_to_json(compose(a, b)) << "\n";
    return 0;
}

int do_hide(const Options& o, std::ostream& out) {
    const Network net = load_network(o.net_path);
    const std::set<std::string> hidden(o.names.begin(), o.names.end());
    out << network_to_json(hide(net, hidden)) << "\n";
    return 0;
}

int do_prob(const Options& o, std::ostream& out) {
    const Network net = load_network(o.net_path);
    const EngineParams params{o.lambda};
    const InputExecution input = load_input(o.input_path);
    const Execution beta = load_execution(o.trace_path);

    json doc;
    doc["trace_length"] = beta.length();
    doc["conditional"] = o.conditional;
    if (o.conditional) {
        if (beta.length() < 1)
            throw ModelError("--conditional needs a trace of length >= 1");
        const double num = trace_probability(net, params, input, beta);
        const double den = trace_probability(net, params, input, beta.prefix(beta.length() - 1));
        doc["probability"] = conditional_probability(num, den);
    } else {
        doc["probability"] = trace_probability(net, params, input, beta);
    }
    out << doc.dump(2) << "\n";
    return 0;
}

int do_simulate(const Options& o, std::ostream& out) {
    const Network net = load_network(o.net_path);
    const EngineParams params{o.lambda};
    const InputExecution input = load_input(o.input_path);
    const Execution target = load_execution(o.trace_path);

    TrialConfig cfg;
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.confidence = o.confidence;
    const EstimateRecord rec =
        estimate_event(net, params, input, target.length(),
                       [&target](const Execution& trace) { return trace == target; }, cfg);

    json doc;
    doc["estimate"] = rec.estimate;
    doc["ci_low"] = rec.ci_low;
    doc["ci_high"] = rec.ci_high;
    doc["successes"] = rec.successes;
    doc["trials"] = rec.trials;
    doc["confidence"] = rec.confidence;
    doc["seed"] = rec.seed;
    out << doc.dump(2) << "\n";
    return 0;
}

int do_verify(const Options& o, std::ostream& out) {
    const EngineParams params;
    int horizon = o.horizon;
    if (horizon < 0)
        horizon = (o.lemma == "independence" || o.lemma == "hiding") ? 3 : 4;
    double tol = o.tol;
    if (tol < 0)
        tol = o.lemma == "beh2-equivalence" ? 1e-12 : 1e-9;

    SuiteReport rep;
    if (!o.net_path.empty()) {
        // Fixed instances supplied by the caller; residuals over sampled data.
        const auto bump = [&rep](double resid, int i) {
            ++rep.cases;
            if (resid > rep.max_residual) {
                rep.max_residual = resid;
                rep.worst_case = "instance " + std::to_string(i);
            }
        };
        if (o.lemma == "beh2-equivalence") {
            const Network net = load_network(o.net_path);
            for (int i = 0; i < o.random_cases; ++i) {
                const std::uint64_t s = substream_seed(o.seed, static_cast<std::uint64_t>(i));
                const InputExecution beta_in = random_input(s, net, horizon);
                const BehaviorFingerprint fp = behavior(net, params, beta_in, horizon);
                const ConditionalFingerprint cf = behavior2(net, params, beta_in, horizon);
                double resid = max_entry_difference(fp, behavior_from_conditionals(cf));
                const ConditionalFingerprint cf_rt = conditionals_from_behavior(fp);
                for (const auto& [key, value] : cf.entries) {
                    const auto it = cf_rt.entries.find(key);
                    resid = std::max(resid, std::abs(value - (it == cf_rt.entries.end()
                                                                  ? 0.0
                                                                  : it->second)));
                }
                bump(resid, i);
            }
        } else if (o.lemma == "hiding") {
            const Network net = load_network(o.net_path);
            std::set<std::string> hidden(o.names.begin(), o.names.end());
            if (hidden.empty()) {
                const auto outs = net.output_names();
                hidden.insert(outs.begin(), outs.end());
            }
            for (int i = 0; i < o.random_cases; ++i) {
                const std::uint64_t s = substream_seed(o.seed, static_cast<std::uint64_t>(i));
                const InputExecution beta_in = random_input(s, net, horizon);
                const Execution beta_hidden =
                    random_hidden_trace(s ^ 1, net, hidden, beta_in, horizon);
                bump(verify_hiding(net, hidden, params, beta_in, beta_hidden), i);
            }
        } else {
            if (o.net2_path.empty())
                throw ModelError("lemma '" + o.lemma + "' needs --net1 and --net2");
            const Network a = load_network(o.net_path);
            const Network b = load_network(o.net2_path);
            if (o.lemma == "acyclic-factorization" && !is_acyclic_composition(a, b))
                throw ModelError("the given pair is not an acyclic composition");
            const Network composite = compose(a, b);
            for (int i = 0; i < o.random_cases; ++i) {
                const std::uint64_t s = substream_seed(o.seed, static_cast<std::uint64_t>(i));
                const InputExecution beta_in = random_input(s, composite, horizon);
                SplitMix64 rng{s ^ 1};
                const int len = 1 + static_cast<int>(rng.next() %
                                                     static_cast<std::uint64_t>(horizon));
                const Execution alpha = sample_execution(composite, params, beta_in, len, s ^ 2);
                if (o.lemma == "acyclic-factorization") {
                    bump(verify_acyclic_factorization(
                             a, b, params, beta_in, alpha.project(composite.external_names())),
                         i);
                } else if (o.lemma == "compose-out") {
                    bump(verify_onestep_factorization(
                             a, b, params, beta_in, alpha.project(composite.external_names())),
                         i);
                } else if (o.lemma == "compose-out-2") {
                    const auto res = verify_onestep_factorization2(a, b, params, beta_in, alpha);
                    bump(*std::max_element(res.begin(), res.end()), i);
                } else { // independence
                    bump(verify_execution_independence(a, b, params, beta_in, alpha), i);
                }
            }
        }
    } else if (o.lemma == "acyclic-factorization") {
        rep = acyclic_factorization_suite(o.random_cases, horizon, o.seed);
    } else if (o.lemma == "compose-out") {
        rep = onestep_factorization_suite(o.random_cases, horizon, o.seed);
    } else if (o.lemma == "compose-out-2") {
        rep = onestep_identities_suite(o.random_cases, horizon, o.seed);
    } else if (o.lemma == "independence") {
        rep = independence_suite(o.random_cases, horizon, o.seed);
    } else if (o.lemma == "hiding") {
        rep = hiding_suite(o.random_cases, horizon, o.seed, o.max_neurons);
    } else { // beh2-equivalence
        rep = equivalence_suite(o.random_cases, horizon, o.seed, o.max_neurons);
    }

    const bool pass = rep.max_residual <= tol;
    json doc;
    doc["lemma"] = o.lemma;
    doc["cases"] = rep.cases;
    doc["max_residual"] = rep.max_residual;
    doc["tolerance"] = tol;
    if (!rep.worst_case.empty())
        doc["worst_case"] = rep.worst_case;
    doc["pass"] = pass;
    out << doc.dump(2) << "\n";
    return pass ? 0 : 3;
}

int do_check(const Options& o, std::ostream& out) {
    Network net = load_network(o.net_path);
    const EngineParams params{o.lambda};

    Problem prob;
    if (o.problem == "copy") {
        prob = copy_problem(o.delta);
    } else if (o.problem == "wta") {
        prob = wta_problem(o.n, o.delta, o.t_c, o.t_s);
    } else if (o.problem == "filter") {
        prob = filter_problem(o.n, o.delta);
    } else { // "attention"
        if (o.delta1 < 0 || o.delta2 < 0)
            throw ModelError("the attention problem needs --delta1 and --delta2");
        prob = attention_problem(o.n, o.delta, o.t_c, o.t_s, {o.delta1, o.delta2});
    }
    if (o.hide_y) {
        std::set<std::string> ys;
        for (int i = 1; i <= o.n; ++i)
            ys.insert("y" + std::to_string(i));
        prob = problem_hide(prob, ys);
        net = hide(net, ys);
    }

    std::vector<InputExecution> inputs;
    for (const auto& path : o.input_paths)
        inputs.push_back(load_input(path));

    const int horizon = o.horizon < 0 ? prob.min_horizon : o.horizon;
    TrialConfig cfg;
    cfg.trials = o.trials;
    cfg.seed = o.seed;
    cfg.confidence = o.confidence;
    const SolveMode mode = o.mode == "exact" ? SolveMode::Exact : SolveMode::MonteCarlo;
    const Verdict verdict = solves(net, params, prob, inputs, horizon, mode, cfg);

    json doc;
    doc["problem"] = prob.name;
    doc["mode"] = o.mode;
    doc["horizon"] = horizon;
    doc["solved"] = verdict.solved;
    doc["records"] = json::array();
    for (const auto& rec : verdict.records) {
        json r;
        r["input"] = as_json(rec.input);
        r["pass"] = rec.pass;
        if (!std::isnan(rec.achieved))
            r["achieved"] = rec.achieved;
        if (!std::isnan(rec.required))
            r["required_bound"] = rec.required;
        r["note"] = rec.note;
        doc["records"].push_back(std::move(r));
    }
    out << doc.dump(2) << "\n";
    return verdict.solved ? 0 : 3;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"stochastic spiking network engine"};
    app.require_subcommand(1);

    CLI::App* build = app.add_subcommand("build", "emit a library network as JSON");
    build->add_option("builder", o.builder, "which construction")
        ->required()
        ->check(CLI::IsMember({"identity", "and", "or", "not", "xor", "wta", "filter",
                               "attention", "cyclic-toy"}));
    build->add_option("--delta", o.delta, "gate error rate");
    build->add_option("--lambda", o.lambda, "sigmoid temperature");
    build->add_option("--k", o.k, "fan-in for and/or");
    build->add_option("--n", o.n, "width for wta/filter/attention");
    build->add_option("--gamma", o.gamma, "winner-take-all weight scale");
    build->add_flag("--x1-init,!--no-x1-init", o.x1_init, "cyclic toy: x1 initially firing");
    build->add_flag("--x2-init,!--no-x2-init", o.x2_init, "cyclic toy: x2 initially firing");

    CLI::App* comp = app.add_subcommand("compose", "compose two networks");
    comp->add_option("a", o.net_path, "first network JSON file")->required();
    comp->add_option("b", o.net2_path, "second network JSON file")->required();

    CLI::App* hid = app.add_subcommand("hide", "reclassify outputs as internal");
    hid->add_option("net", o.net_path, "network JSON file")->required();
    hid->add_option("names", o.names, "output neurons to hide")->required();

    CLI::App* prob = app.add_subcommand("prob", "exact trace probability");
    prob->add_option("net", o.net_path, "network JSON file")->required();
    prob->add_option("--input", o.input_path, "input execution JSON file")->required();
    prob->add_option("--trace", o.trace_path, "trace JSON file (rows over the externals)")
        ->required();
    prob->add_flag("--conditional", o.conditional,
                   "probability of the last step given the rest");
    prob->add_option("--lambda", o.lambda, "sigmoid temperature");

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo estimate of a trace event");
    sim->add_option("net", o.net_path, "network JSON file")->required();
    sim->add_option("--input", o.input_path, "input execution JSON file")->required();
    sim->add_option("--trace", o.trace_path, "trace JSON file to match")->required();
    sim->add_option("--trials", o.trials, "number of sampled executions");
    sim->add_option("--seed", o.seed, "master seed");
    sim->add_option("--confidence", o.confidence, "confidence level for the interval");
    sim->add_option("--lambda", o.lambda, "sigmoid temperature");

    CLI::App* ver = app.add_subcommand("verify", "check an exact identity on many instances");
    ver->add_option("lemma", o.lemma, "which identity")
        ->required()
        ->check(CLI::IsMember({"acyclic-factorization", "compose-out", "compose-out-2",
                               "independence", "hiding", "beh2-equivalence"}));
    ver->add_option("--random", o.random_cases, "number of random instances");
    ver->add_option("--horizon", o.horizon, "trace length bound (default per lemma)");
    ver->add_option("--seed", o.seed, "master seed");
    ver->add_option("--tol", o.tol, "residual tolerance (default per lemma)");
    ver->add_option("--max-neurons", o.max_neurons,
                    "size bound for random single-network lemmas");
    ver->add_option("--net1", o.net_path, "fixed network (or first of a pair)");
    ver->add_option("--net2", o.net2_path, "fixed second network of a pair");
    ver->add_option("--hide", o.names, "outputs to hide (hiding lemma; default all)");

    CLI::App* chk = app.add_subcommand("check", "problem conformance verdict");
    chk->add_option("net", o.net_path, "network JSON file")->required();
    chk->add_option("problem", o.problem, "which problem")
        ->required()
        ->check(CLI::IsMember({"copy", "wta", "filter", "attention"}));
    chk->add_option("--input", o.input_paths, "input execution JSON file (repeatable)")
        ->required();
    chk->add_option("--delta", o.delta, "problem error bound");
    chk->add_option("--n", o.n, "problem width");
    chk->add_option("--tc", o.t_c, "convergence time bound");
    chk->add_option("--ts", o.t_s, "stability window");
    chk->add_option("--delta1", o.delta1, "attention split: winner-take-all share");
    chk->add_option("--delta2", o.delta2, "attention split: filter share");
    chk->add_flag("--hide-y", o.hide_y, "check the hidden variant (y outputs hidden)");
    chk->add_option("--horizon", o.horizon, "judgment horizon (default: problem minimum)");
    chk->add_option("--mode", o.mode, "exact or montecarlo")
        ->check(CLI::IsMember({"exact", "montecarlo"}));
    chk->add_option("--trials", o.trials, "samples in montecarlo mode");
    chk->add_option("--seed", o.seed, "master seed in montecarlo mode");
    chk->add_option("--confidence", o.confidence, "confidence level");
    chk->add_option("--lambda", o.lambda, "sigmoid temperature");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (build->parsed())
            return do_build(o, out);
        if (comp->parsed())
            return do_compose(o, out);
        if (hid->parsed())
            return do_hide(o, out);
        if (prob->parsed())
            return do_prob(o, out);
        if (sim->parsed())
            return do_simulate(o, out);
        if (ver->parsed())
            return do_verify(o, out);
        if (chk->parsed())
            return do_check(o, out);
        err << "no command given\n";
        return 1;
    } catch (const ModelError& e) {
        json doc;
        doc["error"] = "model";
        doc["message"] = e.what();
        out << doc.dump(2) << "\n";
        return 2;
    } catch (const std::exception& e) {
        json doc;
        doc["error"] = "internal";
        doc["message"] = e.what();
        out << doc.dump(2) << "\n";
        return 2;
    }
}

} // namespace snn::cli
