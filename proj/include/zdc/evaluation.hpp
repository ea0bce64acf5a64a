#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "zdc/belief.hpp"
#include "zdc/common.hpp"
#include "zdc/markov_source.hpp"
#include "zdc/qlearning.hpp"
#include "zdc/simplex.hpp"

namespace zdc {

inline double snr_db(double variance, double distortion) {
    if (!(variance > 0.0) || !(distortion > 0.0))
        throw NonPositiveInput("snr_db: variance and distortion must be positive");
    return 10.0 * std::log10(variance / distortion);
}

struct RunReport {
    std::uint64_t T = 0;
    double avg_distortion = 0.0;
    double snr_db = 0.0; // +inf when avg_distortion == 0 (lossless)
    double rate_bits = 0.0;
    double var_x = 0.0;
    std::uint64_t seed = 0;

    bool lossless() const { return avg_distortion == 0.0; }
};

/// Replay a policy through the encoder/channel/decoder pipeline and measure
/// the time-averaged distortion. Encoder and decoder each run their own
/// predictor recursion and must stay synchronized.
inline RunReport evaluate_policy(const FiniteSource& source, const Policy& policy,
                                 const DistortionSpec& dist, std::uint64_t T, std::uint64_t seed,
                                 const ProbabilityVector* initial = nullptr) {
    if (T < 1) throw Error("evaluate_policy: T must be >= 1");
    if (policy.n < 1) throw PolicyConfigMismatch("evaluate_policy: policy has invalid n");
    Rng rng(seed);
    const ProbabilityVector zeta = invariant_distribution(source);
    ProbabilityVector pi_enc = initial ? *initial : zeta;
    ProbabilityVector pi_dec = pi_enc;
    std::size_t x = sample_index(pi_enc, rng);

    // Channel alphabet size from the policy's quantizers.
    int M = 1;
    for (int v : policy.fallback.map) M = std::max(M, v + 1);
    for (const auto& [key, Q] : policy.action_map)
        for (int v : Q.map) M = std::max(M, v + 1);

    double total = 0.0;
    for (std::uint64_t t = 0; t < T; ++t) {
        const TypeVector pihat = quantize(pi_enc, policy.n);
        const Quantizer& Q = policy.at(pihat);
        const int q = apply(Q, x);
        const ProbabilityVector pibar = filter_from_predictor(pi_dec, Q, q);
        const double xhat = optimal_reconstruction(pibar, dist, source);
        total += dist.d(source.value(x), xhat);
        pi_enc = predictor_update(pi_enc, Q, q, source);
        pi_dec = predictor_update(pi_dec, Q, q, source);
        assert(pi_enc.p == pi_dec.p && "encoder/decoder predictor desync");
        x = sample_index(source.row(x), rng);
    }

    RunReport report;
    report.T = T;
    report.seed = seed;
    report.avg_distortion = total / static_cast<double>(T);
    report.var_x = stationary_variance(source, zeta);
    report.rate_bits = std::log2(static_cast<double>(M));
    report.snr_db = report.avg_distortion > 0.0
                        ? snr_db(report.var_x, report.avg_distortion)
                        : std::numeric_limits<double>::infinity();
    return report;
}

/// Monte Carlo estimate of the discounted distortion of a policy started at
/// the invariant distribution, truncated at `horizon`.
inline double discounted_cost_estimate(const FiniteSource& source, const Policy& policy,
                                       const DistortionSpec& dist, double beta,
                                       std::uint64_t horizon, std::uint64_t num_runs,
                                       std::uint64_t seed) {
    if (!(beta > 0.0 && beta < 1.0)) throw Error("discounted_cost_estimate: beta must be in (0,1)");
    const ProbabilityVector zeta = invariant_distribution(source);
    double total = 0.0;
    for (std::uint64_t r = 0; r < num_runs; ++r) {
        Rng rng(seed + r);
        ProbabilityVector pi = zeta;
        std::size_t x = sample_index(pi, rng);
        double acc = 0.0;
        double discount = 1.0;
        for (std::uint64_t t = 0; t < horizon; ++t) {
            const TypeVector pihat = quantize(pi, policy.n);
            const Quantizer& Q = policy.at(pihat);
            const int q = apply(Q, x);
            const ProbabilityVector pibar = filter_from_predictor(pi, Q, q);
            const double xhat = optimal_reconstruction(pibar, dist, source);
            acc += discount * dist.d(source.value(x), xhat);
            discount *= beta;
            pi = predictor_update(pi, Q, q, source);
            x = sample_index(source.row(x), rng);
        }
        total += acc;
    }
    return total / static_cast<double>(num_runs);
}

/// Horizon making the truncation error of the discounted sum at most
/// `truncation_error` for costs bounded by `c_max`.
inline std::uint64_t discount_horizon(double beta, double c_max, double truncation_error) {
    const double tail0 = c_max / (1.0 - beta);
    if (tail0 <= truncation_error) return 1;
    return static_cast<std::uint64_t>(
               std::ceil(std::log(truncation_error / tail0) / std::log(beta))) +
           1;
}

/// Runs one sample path (true initial law prior_a) under uniform
/// exploration and tracks two predictors from different priors driven by
/// the same realized (Q_t, q_t). Returns the per-step TV distance.
inline std::vector<double> filter_stability_diagnostic(const FiniteSource& source,
                                                       const ProbabilityVector& prior_a,
                                                       const ProbabilityVector& prior_b,
                                                       std::uint64_t T, std::uint64_t seed) {
    if (prior_a.dim() != source.m() || prior_b.dim() != source.m())
        throw DimensionMismatch("filter_stability_diagnostic: prior dimension mismatch");
    Rng rng(seed);
    QuantizerSpace space{source.m(), source.m(), QuantizerMode::full};
    // Channel alphabet size equals the source alphabet here; the diagnostic
    // only needs a randomized exploration policy, not a particular rate.
    ProbabilityVector pa = prior_a;
    ProbabilityVector pb = prior_b;
    std::size_t x = sample_index(prior_a, rng);
    std::vector<double> trace;
    trace.reserve(T);
    for (std::uint64_t t = 0; t < T; ++t) {
        trace.push_back(tv_distance(pa, pb));
        const Quantizer Q = sample_uniform(space, rng);
        const int q = apply(Q, x);
        pa = predictor_update(pa, Q, q, source);
        try {
            pb = predictor_update(pb, Q, q, source);
        } catch (const ZeroMassBin&) {
            throw ZeroMassBin("filter_stability_diagnostic: mismatched prior lost mass at step " +
                              std::to_string(t));
        }
        x = sample_index(source.row(x), rng);
    }
    return trace;
}

} // namespace zdc
