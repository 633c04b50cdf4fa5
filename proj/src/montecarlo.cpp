#include "snn/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "engine_detail.hpp"

namespace snn {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t trial) {
    return mix64(master_seed ^ mix64(trial + 0x9e3779b97f4a7c15ull));
}

// Acklam's rational approximation to the standard-normal quantile, polished
// with one Halley step against erfc, which brings it to near machine
// precision over the whole open interval.
namespace {

double inverse_normal_cdf(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    static constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    constexpr double sqrt_two_pi = 2.5066282746310002;
    const double err = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = err * sqrt_two_pi * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

} // namespace

double z_for_confidence(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ModelError("confidence level must lie strictly between 0 and 1");
    return inverse_normal_cdf(0.5 * (1.0 + confidence));
}

std::pair<double, double> binomial_ci(std::uint64_t successes, std::uint64_t trials,
                                      double confidence) {
    if (trials == 0)
        throw ModelError("confidence interval requires at least one trial");
    if (successes > trials)
        throw ModelError("successes cannot exceed trials");
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double half = z_for_confidence(confidence) * std::sqrt(phat * (1.0 - phat) / n) +
                        0.5 / n; // continuity correction
    return {std::max(0.0, phat - half), std::min(1.0, phat + half)};
}

namespace {

// Masks of one sampled execution, one neuron-bit row per step.
void sample_rows(const detail::Compiled& c, const InputExecution& input, int horizon,
                 std::uint64_t seed, std::vector<std::uint32_t>& rows) {
    SplitMix64 rng{seed};
    rows.clear();
    std::uint32_t cur = detail::input_bits(c, input, 0) | c.lc_to_neuron_mask(c.f0);
    rows.push_back(cur);
    for (int t = 1; t <= horizon; ++t) {
        const double* p = c.probs(cur);
        std::uint32_t lc = 0;
        for (int i = 0; i < c.n; ++i) { // canonical neuron order
            const int k = c.lc_pos[i];
            if (k < 0)
                continue;
            if (rng.u01() < p[k])
                lc |= 1u << k;
        }
        cur = detail::input_bits(c, input, t) | c.lc_to_neuron_mask(lc);
        rows.push_back(cur);
    }
}

Execution rows_to_execution(const std::vector<std::uint32_t>& rows,
                            const std::vector<std::string>& names,
                            const std::vector<int>& positions) {
    Execution e;
    e.steps.reserve(rows.size());
    for (const std::uint32_t row : rows) {
        std::vector<std::uint8_t> v(names.size());
        for (std::size_t k = 0; k < names.size(); ++k)
            v[k] = (row >> positions[k] & 1u) ? 1 : 0;
        e.steps.emplace_back(names, std::move(v));
    }
    return e;
}

std::vector<int> iota_positions(int n) {
    std::vector<int> pos(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        pos[static_cast<std::size_t>(i)] = i;
    return pos;
}

} // namespace

Execution sample_execution(const Network& net, const EngineParams& params,
                           const InputExecution& input, int horizon, std::uint64_t seed) {
    if (horizon < 0)
        throw ModelError("horizon must be non-negative");
    detail::check_input_domain(net, input);
    const detail::Compiled c = detail::compile(net, params.lambda);
    std::vector<std::uint32_t> rows;
    sample_rows(c, input, horizon, seed, rows);
    return rows_to_execution(rows, net.names(), iota_positions(net.size()));
}

EstimateRecord estimate_event(const Network& net, const EngineParams& params,
                              const InputExecution& input, int horizon,
                              const std::function<bool(const Execution&)>& predicate,
                              const TrialConfig& cfg) {
    if (cfg.trials == 0)
        throw ModelError("at least one trial is required");
    if (horizon < 0)
        throw ModelError("horizon must be non-negative");
    detail::check_input_domain(net, input);
    const detail::Compiled c = detail::compile(net, params.lambda);
    const auto ext_names = net.external_names();
    const auto ext_pos = net.external_indices();

    std::uint64_t successes = 0;
    std::vector<std::uint32_t> rows;
    for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
        sample_rows(c, input, horizon, substream_seed(cfg.seed, trial), rows);
        if (predicate(rows_to_execution(rows, ext_names, ext_pos)))
            ++successes;
    }

    EstimateRecord r;
    r.successes = successes;
    r.trials = cfg.trials;
    r.estimate = static_cast<double>(successes) / static_cast<double>(cfg.trials);
    std::tie(r.ci_low, r.ci_high) = binomial_ci(successes, cfg.trials, cfg.confidence);
    r.confidence = cfg.confidence;
    r.seed = cfg.seed;
    return r;
}

BehaviorFingerprint empirical_fingerprint(const Network& net, const EngineParams& params,
                                          const InputExecution& input, int horizon,
                                          const TrialConfig& cfg) {
    if (cfg.trials == 0)
        throw ModelError("at least one trial is required");
    if (horizon < 0)
        throw ModelError("horizon must be non-negative");
    detail::check_input_domain(net, input);
    const detail::Compiled c = detail::compile(net, params.lambda);

    std::map<std::string, std::uint64_t> counts;
    std::vector<std::uint32_t> rows;
    std::string key;
    for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
        sample_rows(c, input, horizon, substream_seed(cfg.seed, trial), rows);
        key.clear();
        for (int t = 0; t <= horizon; ++t) {
            std::uint32_t ext = 0;
            for (int pos = 0; pos < c.n_ext; ++pos)
                if (rows[static_cast<std::size_t>(t)] >> c.ext_neuron[pos] & 1u)
                    ext |= 1u << pos;
            detail::key_append_row(key, ext, c.n_ext, t);
            ++counts[key];
        }
    }

    BehaviorFingerprint fp;
    fp.externals = net.external_names();
    fp.horizon = horizon;
    fp.lambda = params.lambda;
    fp.input = input;
    fp.empirical = true;
    for (const auto& [k, count] : counts)
        fp.entries.emplace(k, static_cast<double>(count) / static_cast<double>(cfg.trials));
    return fp;
}

} // namespace snn
