#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "snn/builders.hpp"
#include "snn/montecarlo.hpp"
#include "snn/prob.hpp"
#include "snn/suite.hpp"

using namespace snn;

TEST_CASE("the generator reproduces the published reference stream") {
    SplitMix64 rng{0};
    CHECK(rng.next() == 0xe220a8397b1dcdafull);
    CHECK(rng.next() == 0x6e789e6aa1b965f4ull);
    CHECK(rng.next() == 0x06c45d188009454full);

    SplitMix64 u{1234567};
    for (int i = 0; i < 1000; ++i) {
        const double x = u.u01();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("substreams are deterministic and well separated") {
    CHECK(substream_seed(7, 0) == substream_seed(7, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t trial = 0; trial < 2000; ++trial)
        seen.insert(substream_seed(42, trial));
    CHECK(seen.size() == 2000);
    CHECK(substream_seed(1, 5) != substream_seed(2, 5));
}

TEST_CASE("normal quantiles match published values") {
    CHECK(z_for_confidence(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-9));
    CHECK(z_for_confidence(0.99) == doctest::Approx(2.5758293035489004).epsilon(1e-9));
    // The default confidence is the two-sided 4-sigma level.
    CHECK(z_for_confidence(TrialConfig{}.confidence) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK_THROWS_AS(z_for_confidence(0.0), ModelError);
    CHECK_THROWS_AS(z_for_confidence(1.0), ModelError);
}

TEST_CASE("binomial intervals cover the point estimate and stay in range") {
    const auto [lo, hi] = binomial_ci(900, 1000, 0.95);
    CHECK(lo > 0.87);
    CHECK(hi < 0.93);
    CHECK(lo < 0.9);
    CHECK(hi > 0.9);

    const auto [lo0, hi0] = binomial_ci(0, 1000, 0.99);
    CHECK(lo0 == 0.0);
    CHECK(hi0 > 0.0);
    const auto [lo1, hi1] = binomial_ci(1000, 1000, 0.99);
    CHECK(hi1 == 1.0);
    CHECK(lo1 < 1.0);

    const auto [wlo, whi] = binomial_ci(90, 100, 0.95);
    CHECK(whi - wlo > hi - lo); // fewer trials, wider interval
}

TEST_CASE("sampled executions respect the model's hard constraints") {
    const Network net = random_network(11, 4, 2);
    const InputExecution input = random_input(12, net, 5);
    const EngineParams params{1.0};

    const Execution a = sample_execution(net, params, input, 5, 1001);
    CHECK(a.length() == 5);
    CHECK(a.steps[0] == initial_configuration(net, input.at(0)));
    const auto in_names = net.input_names();
    for (int t = 1; t <= 5; ++t)
        CHECK(a.steps[static_cast<std::size_t>(t)].project(in_names) == input.at(t));

    // Identical seeds reproduce; different seeds diverge somewhere.
    CHECK(sample_execution(net, params, input, 5, 1001) == a);
    bool differs = false;
    for (std::uint64_t s = 1002; s < 1012 && !differs; ++s)
        differs = sample_execution(net, params, input, 5, s) != a;
    CHECK(differs);

    // Every sampled execution has positive model probability.
    CHECK(execution_probability(net, params, input, a) > 0.0);
}

TEST_CASE("event estimates are deterministic and match their tally") {
    const Network net = identity_gate(GateParams{0.1, 1.0});
    const auto input = InputExecution::make({"x"}, {{1}}, Extension::Hold);
    const EngineParams params{1.0};
    TrialConfig cfg;
    cfg.trials = 5000;
    cfg.seed = 99;

    const auto pred = [](const Execution& beta) { return beta.steps[1].value("y"); };
    const EstimateRecord rec = estimate_event(net, params, input, 1, pred, cfg);
    CHECK(rec.trials == 5000);
    CHECK(rec.seed == 99);
    CHECK(rec.estimate ==
          doctest::Approx(static_cast<double>(rec.successes) / 5000.0).epsilon(1e-15));
    CHECK(rec.ci_low <= rec.estimate);
    CHECK(rec.ci_high >= rec.estimate);

    const EstimateRecord again = estimate_event(net, params, input, 1, pred, cfg);
    CHECK(again.estimate == rec.estimate);
    CHECK(again.successes == rec.successes);

    const EstimateRecord sure = estimate_event(
        net, params, input, 1, [](const Execution&) { return true; }, cfg);
    CHECK(sure.estimate == 1.0);
}

TEST_CASE("the confidence interval covers the exact value") {
    // One-step identity relay: the exact event probability is 0.9. A 4-sigma
    // interval at 20000 trials misses it with probability well under 1e-4;
    // the fixed seed freezes one known-good draw.
    const Network net = identity_gate(GateParams{0.1, 1.0});
    const auto input = InputExecution::make({"x"}, {{1}}, Extension::Hold);
    const EngineParams params{1.0};
    TrialConfig cfg;
    cfg.trials = 20000;
    cfg.seed = 7;

    const double exact = event_probability(net, params, input, 1, [](const Execution& beta) {
        return beta.steps[1].value("y");
    });
    CHECK(exact == doctest::Approx(0.9).epsilon(1e-12));

    const EstimateRecord rec = estimate_event(net, params, input, 1, [](const Execution& beta) {
        return beta.steps[1].value("y");
    }, cfg);
    CHECK(rec.ci_low <= exact);
    CHECK(rec.ci_high >= exact);
    CHECK(std::abs(rec.estimate - exact) < 0.01);
}

TEST_CASE("empirical fingerprints are additive and near the exact behavior") {
    const Network net = random_network(31, 4, 2);
    const InputExecution input = random_input(32, net, 2);
    const EngineParams params{1.0};
    TrialConfig cfg;
    cfg.trials = 40000;
    cfg.seed = 5;

    const BehaviorFingerprint emp = empirical_fingerprint(net, params, input, 2, cfg);
    CHECK(emp.empirical);
    CHECK(emp.horizon == 2);

    const int n_ext = static_cast<int>(emp.externals.size());
    double level2 = 0.0;
    for (const auto& [key, value] : emp.entries) {
        if (trace_key_length(key, n_ext) == 2)
            level2 += value;
        if (trace_key_length(key, n_ext) < 2) {
            double child_sum = 0.0;
            for (const auto& [k2, v2] : emp.entries)
                if (trace_key_length(k2, n_ext) == trace_key_length(key, n_ext) + 1 &&
                    trace_key_parent(k2, n_ext) == key)
                    child_sum += v2;
            CHECK(child_sum == doctest::Approx(value).epsilon(1e-12));
        }
    }
    CHECK(level2 == doctest::Approx(1.0).epsilon(1e-12));

    const BehaviorFingerprint exact = behavior(net, params, input, 2);
    // 5-sigma slack on the worst-case binomial standard error.
    CHECK(max_entry_difference(emp, exact) <= 5.0 * 0.5 / std::sqrt(40000.0));
}
