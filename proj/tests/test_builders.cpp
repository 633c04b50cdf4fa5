#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "snn/builders.hpp"
#include "snn/compose.hpp"
#include "snn/prob.hpp"

using namespace snn;

namespace {

// P(output value at time 1 | all-lc-silent start) for a one-layer gate under
// a constant input row.
double one_step(const Network& net, const FiringPattern& input_row, const std::string& out,
                bool fired, double lambda = 1.0) {
    const FiringPattern start = initial_configuration(net, input_row);
    const double p = firing_probability(potential(net, start, out), lambda);
    return fired ? p : 1.0 - p;
}

FiringPattern input_row(const Network& net, std::vector<std::uint8_t> vals) {
    return FiringPattern(net.input_names(), std::move(vals));
}

} // namespace

TEST_CASE("the weight unit is the log-odds of the error rate") {
    const GateParams p{0.1, 1.0};
    CHECK(p.L() == doctest::Approx(2.1972245773362196).epsilon(1e-15));
    CHECK(p.L() == doctest::Approx(std::log(9.0)).epsilon(1e-15));
    const GateParams hot{0.1, 2.0};
    CHECK(hot.L() == doctest::Approx(2.0 * std::log(9.0)).epsilon(1e-15));

    CHECK_THROWS_AS(validate_gate_params(GateParams{0.5, 1.0}), ModelError);
    CHECK_THROWS_AS(validate_gate_params(GateParams{0.0, 1.0}), ModelError);
    CHECK_THROWS_AS(validate_gate_params(GateParams{0.1, 0.0}), ModelError);
}

TEST_CASE("identity gate relays its input with probability 1 - delta") {
    const GateParams p{0.1, 1.0};
    const Network net = identity_gate(p);
    CHECK(net.input_names() == std::vector<std::string>{"x"});
    CHECK(net.output_names() == std::vector<std::string>{"y"});

    CHECK(one_step(net, input_row(net, {1}), "y", true) ==
          doctest::Approx(0.9).epsilon(1e-13));
    CHECK(one_step(net, input_row(net, {0}), "y", false) ==
          doctest::Approx(0.9).epsilon(1e-13));

    // The calibration scales with temperature.
    const GateParams hot{0.1, 3.0};
    CHECK(one_step(identity_gate(hot), input_row(net, {1}), "y", true, 3.0) ==
          doctest::Approx(0.9).epsilon(1e-13));
}

TEST_CASE("threshold gates sit one weight unit from their tipping point") {
    const GateParams p{0.1, 1.0};
    const Network a3 = and_gate(3, p);
    CHECK(a3.input_names() == std::vector<std::string>{"x1", "x2", "x3"});
    CHECK(one_step(a3, input_row(a3, {1, 1, 1}), "y", true) ==
          doctest::Approx(0.9).epsilon(1e-13));
    CHECK(one_step(a3, input_row(a3, {1, 1, 0}), "y", true) ==
          doctest::Approx(0.1).epsilon(1e-13));

    const Network o3 = or_gate(3, p);
    CHECK(one_step(o3, input_row(o3, {1, 0, 0}), "y", true) ==
          doctest::Approx(0.9).epsilon(1e-13));
    CHECK(one_step(o3, input_row(o3, {0, 0, 0}), "y", true) ==
          doctest::Approx(0.1).epsilon(1e-13));

    CHECK_THROWS_AS(and_gate({}, "y", p), ModelError);
}

TEST_CASE("negation runs through an inhibitor in two steps") {
    const GateParams p{0.1, 1.0};
    const Network net = not_gate(p);
    CHECK(net.internal_names() == std::vector<std::string>{"a"});
    CHECK(net.output_names() == std::vector<std::string>{"y"});

    // P(y at 2 equals NOT x) = (1-d)^2 + d^2: either both stages work or
    // both fail.
    const EngineParams params{1.0};
    for (std::uint8_t x : {0, 1}) {
        const auto input = InputExecution::make({"x"}, {{x}}, Extension::Hold);
        const double got = event_probability(net, params, input, 2, [&](const Execution& beta) {
            return beta.steps[2].value("y") == (x == 0);
        });
        CHECK(got == doctest::Approx(0.9 * 0.9 + 0.1 * 0.1).epsilon(1e-13));
    }
}

TEST_CASE("the exclusive-or circuit composes nand, or, and a final and") {
    const GateParams p{0.05, 1.0};
    const Network net = xor_circuit(p);
    CHECK(net.input_names() == std::vector<std::string>{"x1", "x2"});
    CHECK(net.output_names() ==
          std::vector<std::string>{"o_and", "o_nand", "o_or", "o_xor"});
    CHECK(net.internal_names() == std::vector<std::string>{"a_nand"});

    // One representative input pair; the full four-way sweep runs in the
    // acceptance gate.
    const auto input = InputExecution::make({"x1", "x2"}, {{0, 1}}, Extension::Hold);
    const EngineParams params{1.0};
    const double got = event_probability(net, params, input, 4, [](const Execution& beta) {
        return beta.steps[3].value("o_nand") && beta.steps[3].value("o_or") &&
               beta.steps[4].value("o_xor");
    });
    CHECK(got >= 0.7737809375);
    CHECK(got < 1.0);
}

TEST_CASE("winner-take-all wiring scales with gamma and balances a tie") {
    const double gamma = kDefaultWtaGamma;
    const Network net = wta_network(3, gamma);
    CHECK(net.input_names() == std::vector<std::string>{"x1", "x2", "x3"});
    CHECK(net.output_names() == std::vector<std::string>{"y1", "y2", "y3"});
    CHECK(net.internal_names() == std::vector<std::string>{"ac", "as"});

    // A contested round leaves each contender at potential exactly zero: the
    // drive (3g input + 2g self) cancels the stabilizer pressure
    // (-2g as, -1g ac) and the 2g bias.
    FiringPattern contested = FiringPattern::from_map({{"x1", true},
                                                       {"x2", true},
                                                       {"x3", false},
                                                       {"y1", true},
                                                       {"y2", true},
                                                       {"y3", false},
                                                       {"as", true},
                                                       {"ac", true}});
    CHECK(potential(net, contested, "y1") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(firing_probability(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));

    // Stabilizer thresholds: "as" detects at least one winner, "ac" at least
    // two contenders.
    FiringPattern one = FiringPattern::from_map({{"x1", true}, {"x2", true}, {"x3", false},
                                                 {"y1", true}, {"y2", false}, {"y3", false},
                                                 {"as", false}, {"ac", false}});
    CHECK(potential(net, one, "as") == doctest::Approx(gamma).epsilon(1e-12));
    CHECK(potential(net, one, "ac") == doctest::Approx(-gamma).epsilon(1e-12));
    FiringPattern two = contested;
    CHECK(potential(net, two, "as") == doctest::Approx(3.0 * gamma).epsilon(1e-12));
    CHECK(potential(net, two, "ac") == doctest::Approx(gamma).epsilon(1e-12));

    // A sole established winner is reinforced far above threshold, and the
    // silenced contender is pushed far below.
    FiringPattern settled = FiringPattern::from_map({{"x1", true}, {"x2", true}, {"x3", false},
                                                     {"y1", true}, {"y2", false}, {"y3", false},
                                                     {"as", true}, {"ac", false}});
    CHECK(potential(net, settled, "y1") == doctest::Approx(gamma).epsilon(1e-12));
    CHECK(potential(net, settled, "y2") == doctest::Approx(-gamma).epsilon(1e-12));

    CHECK_THROWS_AS(wta_network(0, gamma), ModelError);
    CHECK_THROWS_AS(wta_network(3, 0.0), ModelError);
}

TEST_CASE("the filter bank is a row of independent conjunctions") {
    const GateParams p{0.05, 1.0};
    const Network net = filter_network(2, p);
    CHECK(net.input_names() == std::vector<std::string>{"w1", "w2", "y1", "y2"});
    CHECK(net.output_names() == std::vector<std::string>{"z1", "z2"});
    CHECK(net.internal_names().empty());

    const FiringPattern active = FiringPattern::from_map(
        {{"w1", true}, {"y1", true}, {"w2", false}, {"y2", false},
         {"z1", false}, {"z2", false}});
    CHECK(firing_probability(potential(net, active, "z1"), 1.0) ==
          doctest::Approx(0.95).epsilon(1e-13));
    CHECK(firing_probability(potential(net, active, "z2"), 1.0) < 0.05);

    CHECK_THROWS_AS(filter_network(0, p), ModelError);
}

TEST_CASE("attention feeds the winner circuit into the filter bank") {
    const GateParams p{0.05, 1.0};
    const Network net = attention_network(2, kDefaultWtaGamma, p);
    CHECK(net.input_names() == std::vector<std::string>{"w1", "w2", "x1", "x2"});
    CHECK(net.output_names() == std::vector<std::string>{"y1", "y2", "z1", "z2"});
    CHECK(net.internal_names() == std::vector<std::string>{"ac", "as"});

    // The component wiring is acyclic even though the winner circuit itself
    // has feedback.
    CHECK(is_acyclic_composition(wta_network(2, kDefaultWtaGamma), filter_network(2, p)));
}

TEST_CASE("the feedback toy relays a pulse around its loop") {
    const GateParams p{0.05, 1.0};
    const CyclicToy toy = cyclic_toy(p);
    CHECK(toy.composite.input_names().empty());
    CHECK(toy.composite.output_names() == std::vector<std::string>{"x1", "x2"});
    CHECK(toy.composite.internal_names() == std::vector<std::string>{"a1", "a2"});
    CHECK(toy.composite.neuron(toy.composite.index("x1")).init);
    CHECK_FALSE(toy.composite.neuron(toy.composite.index("x2")).init);

    // With both of its feeders firing, the relay output x2 fires with
    // probability 1 - d^3 / ((1-d)^3 + d^3): potential 3L.
    const double d = 0.05;
    const FiringPattern both = FiringPattern::from_map(
        {{"x1", false}, {"x2", true}, {"a1", true}, {"a2", false}});
    const double got = firing_probability(potential(toy.composite, both, "x2"), 1.0);
    const double want = 1.0 - std::pow(d, 3) / (std::pow(1 - d, 3) + std::pow(d, 3));
    CHECK(got == doctest::Approx(want).epsilon(1e-13));

    // The pulse makes it around the loop by time 4 with high probability.
    const EngineParams params{1.0};
    const auto input = InputExecution::zeros({});
    const double joint =
        event_probability(toy.composite, params, input, 4, [](const Execution& beta) {
            return beta.steps[4].value("x1") && beta.steps[4].value("x2");
        });
    CHECK(joint >= std::pow(0.95, 7));
    CHECK(joint < 1.0);
}
