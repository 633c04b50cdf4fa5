#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "snn/montecarlo.hpp"
#include "snn/prob.hpp"
#include "snn/suite.hpp"

using namespace snn;

namespace {

// Every trace of length `horizon`: input columns follow the stream, output
// columns range over all assignments (including ones that contradict the
// initial state, which must come out with probability zero).
std::vector<Execution> all_traces(const Network& net, const InputExecution& input, int horizon) {
    const auto ext = net.external_names();
    const auto outs = net.output_names();
    const auto ins = net.input_names();
    const int n_out = static_cast<int>(outs.size());

    std::vector<Execution> result;
    const std::uint64_t combos = 1ull << (n_out * (horizon + 1));
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
        Execution beta;
        for (int t = 0; t <= horizon; ++t) {
            const auto in_row = input.row(t);
            std::vector<std::uint8_t> vals;
            std::size_t in_pos = 0;
            std::size_t out_pos = 0;
            for (const auto& name : ext) {
                if (in_pos < ins.size() && ins[in_pos] == name) {
                    vals.push_back(in_row[in_pos]);
                    ++in_pos;
                } else {
                    const int bit = t * n_out + static_cast<int>(out_pos);
                    vals.push_back((mask >> bit) & 1);
                    ++out_pos;
                }
            }
            beta.steps.emplace_back(ext, std::move(vals));
        }
        result.push_back(std::move(beta));
    }
    return result;
}

} // namespace

TEST_CASE("trace keys serialize rows and navigate the prefix tree") {
    Execution beta;
    beta.steps = {FiringPattern({"a", "b"}, {0, 1}), FiringPattern({"a", "b"}, {1, 1})};
    const std::string key = trace_key(beta);
    CHECK(key == "01;11");
    CHECK(trace_key_length(key, 2) == 1);
    CHECK(trace_key_parent(key, 2) == "01");
    CHECK(trace_key_length("01", 2) == 0);
    CHECK_THROWS_AS(trace_key_parent("01", 2), ModelError);

    CHECK(trace_key_bit(key, 2, 0, 0) == false);
    CHECK(trace_key_bit(key, 2, 0, 1) == true);
    CHECK(trace_key_bit(key, 2, 1, 0) == true);

    const Execution back = trace_from_key(key, {"a", "b"});
    CHECK(back == beta);
}

TEST_CASE("transition probability multiplies per-neuron branch probabilities") {
    const Network net({{"x", NeuronClass::Input, 0.0, false},
                       {"u", NeuronClass::Output, 0.5, false},
                       {"v", NeuronClass::Internal, -0.25, false}},
                      {{"x", "u", 1.0}, {"u", "v", 2.0}, {"v", "u", -1.0}});
    const EngineParams params{1.5};

    SplitMix64 rng{99};
    for (int it = 0; it < 20; ++it) {
        const FiringPattern prev({"u", "v", "x"},
                                 {static_cast<std::uint8_t>(rng.next() & 1),
                                  static_cast<std::uint8_t>(rng.next() & 1),
                                  static_cast<std::uint8_t>(rng.next() & 1)});
        const FiringPattern next({"u", "v"},
                                 {static_cast<std::uint8_t>(rng.next() & 1),
                                  static_cast<std::uint8_t>(rng.next() & 1)});
        const double pu = firing_probability(potential(net, prev, "u"), params.lambda);
        const double pv = firing_probability(potential(net, prev, "v"), params.lambda);
        const double want = (next.value("u") ? pu : 1 - pu) * (next.value("v") ? pv : 1 - pv);
        CHECK(transition_probability(net, params, prev, next) ==
              doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("execution probability matches the enumeration oracle") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Network net = random_network(seed, 4, 2);
        const InputExecution input = random_input(seed ^ 0xabc, net, 3);
        const EngineParams params{0.8};
        const Execution alpha = sample_execution(net, params, input, 3, seed * 31 + 7);
        const double got = execution_probability(net, params, input, alpha);
        const double want = oracle::execution_probability(net, params.lambda, input, alpha);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
        CHECK(got > 0.0);
    }
}

TEST_CASE("execution probability validates consistency with stream and state") {
    const Network net({{"x", NeuronClass::Input, 0.0, false},
                       {"y", NeuronClass::Output, 0.0, true}},
                      {{"x", "y", 1.0}});
    const EngineParams params{1.0};
    const auto input = InputExecution::make({"x"}, {{1}, {0}});

    Execution ok;
    ok.steps = {FiringPattern({"x", "y"}, {1, 1}), FiringPattern({"x", "y"}, {0, 1})};
    CHECK(execution_probability(net, params, input, ok) > 0.0);

    Execution bad_init = ok;
    bad_init.steps[0] = FiringPattern({"x", "y"}, {1, 0});
    CHECK_THROWS_AS(execution_probability(net, params, input, bad_init), ModelError);

    Execution bad_input = ok;
    bad_input.steps[1] = FiringPattern({"x", "y"}, {1, 1});
    CHECK_THROWS_AS(execution_probability(net, params, input, bad_input), ModelError);
}

TEST_CASE("trace probability equals the exhaustive execution sum") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const Network net = random_network(seed * 13 + 1, 4, 2);
        const InputExecution input = random_input(seed ^ 0x51, net, 2);
        const EngineParams params{1.2};
        double level_sum = 0.0;
        for (const auto& beta : all_traces(net, input, 2)) {
            const double got = trace_probability(net, params, input, beta);
            const double want = oracle::trace_probability(net, params.lambda, input, beta);
            CHECK(std::abs(got - want) <= 1e-12);
            level_sum += got;
        }
        CHECK(level_sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("cone probability handles subset constraints and contradictions") {
    for (std::uint64_t seed = 2; seed <= 10; ++seed) {
        const Network net = random_network(seed * 7, 4, 2);
        if (net.lc_names().size() > 3)
            continue;
        const InputExecution input = random_input(seed, net, 2);
        const EngineParams params{1.0};

        // Random per-step constraints over random neuron subsets.
        SplitMix64 rng{seed * 1000 + 3};
        const auto names = net.names();
        std::vector<FiringPattern> constraints;
        for (int t = 0; t <= 2; ++t) {
            std::vector<std::string> dom;
            std::vector<std::uint8_t> vals;
            for (const auto& name : names)
                if (rng.next() & 1) {
                    dom.push_back(name);
                    vals.push_back(static_cast<std::uint8_t>(rng.next() & 1));
                }
            constraints.emplace_back(dom, vals);
        }
        const double got = cone_probability(net, params, input, constraints);
        const double want = oracle::cone_probability(net, params.lambda, input, constraints);
        CHECK(std::abs(got - want) <= 1e-12);
    }

    // An empty constraint list is the certain event.
    const Network tiny({{"y", NeuronClass::Output, 0.0, false}}, {});
    CHECK(cone_probability(tiny, EngineParams{}, InputExecution::zeros({}), {}) == 1.0);
}

TEST_CASE("the forward-filter state tracks prefix mass") {
    const Network net = random_network(42, 4, 2);
    const InputExecution input = random_input(43, net, 3);
    const EngineParams params{1.0};
    const Execution alpha = sample_execution(net, params, input, 3, 44);
    const Execution beta = alpha.project(net.external_names());
    const auto outs = net.output_names();
    const auto ints = net.internal_names();

    TraceDistribution dist(net, params, input, beta.steps[0].project(outs));
    CHECK(dist.step() == 0);
    for (int t = 1; t <= 3; ++t) {
        dist.advance(beta.steps[static_cast<std::size_t>(t)].project(outs));
        CHECK(dist.step() == t);
        const double want = trace_probability(net, params, input, beta.prefix(t));
        CHECK(dist.total() == doctest::Approx(want).epsilon(1e-12));

        // Mass decomposes over internal configurations.
        double acc = 0.0;
        for (std::uint64_t m = 0; m < (1ull << ints.size()); ++m) {
            std::vector<std::uint8_t> vals;
            for (std::size_t j = 0; j < ints.size(); ++j)
                vals.push_back((m >> j) & 1);
            acc += dist.mass(FiringPattern(ints, vals));
        }
        CHECK(acc == doctest::Approx(dist.total()).epsilon(1e-12));
    }
}

TEST_CASE("event probability sums matching traces") {
    const Network net = random_network(7, 4, 2);
    const InputExecution input = random_input(8, net, 2);
    const EngineParams params{1.0};

    CHECK(event_probability(net, params, input, 2, [](const Execution&) { return true; }) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // Against the oracle: probability that the first output fires at time 2.
    const std::string target = net.output_names().front();
    double want = 0.0;
    for (const auto& beta : all_traces(net, input, 2))
        if (beta.steps[2].value(target))
            want += oracle::trace_probability(net, params.lambda, input, beta);
    const double got = event_probability(net, params, input, 2, [&](const Execution& beta) {
        return beta.steps[2].value(target);
    });
    CHECK(got == doctest::Approx(want).epsilon(1e-11));
}

TEST_CASE("behavior lists every positive-probability trace cone") {
    const Network net = random_network(19, 4, 2);
    const InputExecution input = random_input(20, net, 3);
    const EngineParams params{1.0};
    const BehaviorFingerprint fp = behavior(net, params, input, 3);

    CHECK(fp.externals == net.external_names());
    CHECK(fp.horizon == 3);
    CHECK_FALSE(fp.empirical);

    const int n_ext = static_cast<int>(fp.externals.size());
    double level3 = 0.0;
    for (const auto& [key, value] : fp.entries) {
        const Execution beta = trace_from_key(key, fp.externals);
        const double want = oracle::trace_probability(net, params.lambda, input, beta);
        CHECK(std::abs(value - want) <= 1e-12);
        if (trace_key_length(key, n_ext) == 3)
            level3 += value;
        // Cone additivity: a parent's mass is the sum of its children.
        if (trace_key_length(key, n_ext) < 3) {
            double child_sum = 0.0;
            for (const auto& [k2, v2] : fp.entries)
                if (trace_key_length(k2, n_ext) == trace_key_length(key, n_ext) + 1 &&
                    trace_key_parent(k2, n_ext) == key)
                    child_sum += v2;
            CHECK(child_sum == doctest::Approx(value).epsilon(1e-12));
        }
    }
    CHECK(level3 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("one-step conditionals chain back to cone probabilities") {
    const Network net = random_network(23, 4, 2);
    const InputExecution input = random_input(24, net, 3);
    const EngineParams params{1.0};

    const BehaviorFingerprint fp = behavior(net, params, input, 3);
    const ConditionalFingerprint cf = behavior2(net, params, input, 3);
    const int n_ext = static_cast<int>(fp.externals.size());

    // The unique length-0 trace anchors the chain with value 1.
    int roots = 0;
    for (const auto& [key, value] : cf.entries)
        if (trace_key_length(key, n_ext) == 0) {
            ++roots;
            CHECK(value == doctest::Approx(1.0).epsilon(1e-14));
        }
    CHECK(roots == 1);

    // Conditional = cone / parent cone, entry by entry.
    for (const auto& [key, value] : cf.entries) {
        if (trace_key_length(key, n_ext) == 0)
            continue;
        const double num = fp.entries.at(key);
        const double den = fp.entries.at(trace_key_parent(key, n_ext));
        CHECK(value == doctest::Approx(num / den).epsilon(1e-12));
    }

    // Round trips.
    CHECK(max_entry_difference(fp, behavior_from_conditionals(cf)) <= 1e-13);
    const ConditionalFingerprint cf2 = conditionals_from_behavior(fp);
    for (const auto& [key, value] : cf.entries)
        CHECK(std::abs(value - cf2.entries.at(key)) <= 1e-12);
}

TEST_CASE("marginalization projects traces and accumulates mass") {
    const Network net = random_network(29, 4, 2);
    const InputExecution input = random_input(30, net, 2);
    const EngineParams params{1.0};
    const BehaviorFingerprint fp = behavior(net, params, input, 2);

    // Keep the inputs plus the first output.
    std::vector<std::string> keep = net.input_names();
    keep.push_back(net.output_names().front());
    std::sort(keep.begin(), keep.end());
    const BehaviorFingerprint marg = marginalize(fp, keep);
    CHECK(marg.externals == keep);

    std::map<std::string, double> want;
    for (const auto& [key, value] : fp.entries) {
        const Execution beta = trace_from_key(key, fp.externals);
        want[trace_key(beta.project(keep))] += value;
    }
    for (const auto& [key, value] : marg.entries)
        CHECK(value == doctest::Approx(want.at(key)).epsilon(1e-12));

    CHECK(max_entry_difference(marginalize(fp, fp.externals), fp) <= 1e-15);
    CHECK_THROWS_AS(marginalize(fp, {"not-a-neuron"}), ModelError);
}

TEST_CASE("max entry difference treats missing keys as zero") {
    BehaviorFingerprint a;
    a.entries = {{"0", 0.25}, {"1", 0.75}};
    BehaviorFingerprint b;
    b.entries = {{"0", 0.25}, {"1", 0.5}, {"0;1", 0.1}};
    CHECK(max_entry_difference(a, b) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(max_entry_difference(b, a) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("conditional probability rejects an empty condition") {
    CHECK(conditional_probability(0.3, 0.6) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(conditional_probability(0.1, 0.0), ModelError);
}

TEST_CASE("fingerprint JSON serialization carries the full map") {
    const Network net = random_network(3, 3, 1);
    const InputExecution input = random_input(4, net, 1);
    const BehaviorFingerprint fp = behavior(net, EngineParams{}, input, 1);
    const std::string text = fingerprint_to_json(fp);
    for (const auto& [key, value] : fp.entries)
        CHECK(text.find("\"" + key + "\"") != std::string::npos);
    CHECK(text.find("\"horizon\": 1") != std::string::npos);
}
