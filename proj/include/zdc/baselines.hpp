#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "zdc/common.hpp"
#include "zdc/evaluation.hpp"
#include "zdc/markov_source.hpp"

namespace zdc {

/// Fixed-rate scalar quantizer: sorted codebook plus midpoint thresholds
/// (nearest-neighbor cells under squared error).
struct ScalarQuantizer {
    std::vector<double> codebook;   // M levels, ascending
    std::vector<double> thresholds; // M-1 boundaries

    std::size_t levels() const { return codebook.size(); }

    std::size_t encode(double x) const {
        return static_cast<std::size_t>(
            std::upper_bound(thresholds.begin(), thresholds.end(), x) - thresholds.begin());
    }

    double decode(std::size_t i) const { return codebook[i]; }

    double quantize_value(double x) const { return codebook[encode(x)]; }

    void rebuild_thresholds() {
        thresholds.resize(codebook.size() > 0 ? codebook.size() - 1 : 0);
        for (std::size_t i = 0; i + 1 < codebook.size(); ++i)
            thresholds[i] = 0.5 * (codebook[i] + codebook[i + 1]);
    }
};

namespace detail {

struct WeightedPoints {
    std::vector<double> values;  // ascending
    std::vector<double> weights; // positive, matching values
};

inline WeightedPoints sorted_points(std::vector<double> values, std::vector<double> weights) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    WeightedPoints out;
    // Merge duplicates so support counting is exact.
    for (std::size_t idx : order) {
        if (weights[idx] <= 0.0) continue;
        if (!out.values.empty() && out.values.back() == values[idx]) {
            out.weights.back() += weights[idx];
        } else {
            out.values.push_back(values[idx]);
            out.weights.push_back(weights[idx]);
        }
    }
    return out;
}

} // namespace detail

/// Lloyd-Max design on a weighted discrete distribution under squared
/// error: centroid / nearest-neighbor alternation until the relative
/// distortion change drops below 1e-9 (cap 1000 iterations). When a finite
/// reproduction alphabet is given, centroids snap to its nearest member.
/// Empty cells are re-seeded by splitting the most populous cell.
inline ScalarQuantizer lloyd_max_weighted(const std::vector<double>& values,
                                          const std::vector<double>& weights, std::size_t M,
                                          const std::optional<std::vector<double>>& reproduction_alphabet =
                                              std::nullopt,
                                          std::vector<double>* distortion_trace = nullptr) {
    const auto pts = detail::sorted_points(values, weights);
    if (pts.values.size() < M)
        throw InsufficientSupport("lloyd_max: fewer distinct values than levels");
    const double total_w = std::accumulate(pts.weights.begin(), pts.weights.end(), 0.0);

    std::optional<std::vector<double>> repro_sorted;
    if (reproduction_alphabet) {
        repro_sorted = *reproduction_alphabet;
        std::sort(repro_sorted->begin(), repro_sorted->end());
    }
    const auto snap = [&](double c) {
        if (!repro_sorted) return c;
        const auto it = std::lower_bound(repro_sorted->begin(), repro_sorted->end(), c);
        if (it == repro_sorted->begin()) return repro_sorted->front();
        if (it == repro_sorted->end()) return repro_sorted->back();
        const double hi = *it;
        const double lo = *(it - 1);
        return (c - lo) <= (hi - c) ? lo : hi;
    };

    // Uniform-quantile initialization.
    ScalarQuantizer sq;
    sq.codebook.resize(M);
    {
        std::size_t j = 0;
        double acc = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            const double target = total_w * (static_cast<double>(i) + 0.5) / static_cast<double>(M);
            while (j + 1 < pts.values.size() && acc + pts.weights[j] < target)
                acc += pts.weights[j++];
            sq.codebook[i] = pts.values[j];
        }
        std::sort(sq.codebook.begin(), sq.codebook.end());
    }
    sq.rebuild_thresholds();

    double prev_distortion = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 1000; ++iter) {
        // Assignment pass.
        std::vector<double> cw(M, 0.0), cs(M, 0.0);
        double distortion = 0.0;
        for (std::size_t i = 0; i < pts.values.size(); ++i) {
            const std::size_t cell = sq.encode(pts.values[i]);
            cw[cell] += pts.weights[i];
            cs[cell] += pts.weights[i] * pts.values[i];
            const double e = pts.values[i] - sq.codebook[cell];
            distortion += pts.weights[i] * e * e;
        }
        distortion /= total_w;
        if (distortion_trace) distortion_trace->push_back(distortion);

        // Centroid pass, with empty-cell re-seeding by splitting the most
        // populous cell.
        for (std::size_t c = 0; c < M; ++c) {
            if (cw[c] > 0.0) {
                sq.codebook[c] = snap(cs[c] / cw[c]);
            } else {
                const std::size_t big = static_cast<std::size_t>(
                    std::max_element(cw.begin(), cw.end()) - cw.begin());
                sq.codebook[c] = snap(cs[big] / cw[big] +
                                      1e-6 * (1.0 + std::abs(cs[big] / cw[big])));
            }
        }
        std::sort(sq.codebook.begin(), sq.codebook.end());
        sq.rebuild_thresholds();

        if (prev_distortion < std::numeric_limits<double>::infinity() &&
            std::abs(prev_distortion - distortion) <= 1e-9 * std::max(prev_distortion, 1e-300))
            break;
        prev_distortion = distortion;
    }
    return sq;
}

/// Lloyd-Max from a sample sequence (unit weights).
inline ScalarQuantizer lloyd_max(const std::vector<double>& samples, std::size_t M,
                                 const std::optional<std::vector<double>>& reproduction_alphabet =
                                     std::nullopt,
                                 std::vector<double>* distortion_trace = nullptr) {
    return lloyd_max_weighted(samples, std::vector<double>(samples.size(), 1.0), M,
                              reproduction_alphabet, distortion_trace);
}

/// Lloyd-Max from an explicit distribution over support points.
inline ScalarQuantizer lloyd_max(const std::vector<double>& support,
                                 const ProbabilityVector& dist, std::size_t M,
                                 const std::optional<std::vector<double>>& reproduction_alphabet =
                                     std::nullopt) {
    return lloyd_max_weighted(support, dist.p, M, reproduction_alphabet);
}

enum class ClassifierMode { identity, lloyd_max };

/// Omniscient finite-state scalar quantizer: a state classifier V over the
/// reproduction values plus one Lloyd-Max codebook per state. Trained with
/// the true previous symbol's class, operated with the class of the
/// previous reconstruction.
struct OFSSQCodebooks {
    std::size_t K = 0;
    ScalarQuantizer classifier;
    std::vector<ScalarQuantizer> per_state;
};

inline OFSSQCodebooks train_ofssq(const std::vector<double>& training_values, std::size_t K,
                                  std::size_t M, ClassifierMode classifier_mode,
                                  const std::optional<std::vector<double>>& reproduction_alphabet =
                                      std::nullopt) {
    if (training_values.size() < 2) throw InsufficientSupport("train_ofssq: too little data");
    OFSSQCodebooks cb;
    cb.K = K;
    if (classifier_mode == ClassifierMode::identity) {
        if (!reproduction_alphabet || reproduction_alphabet->size() != K)
            throw ConfigMismatch("train_ofssq: identity classifier needs |alphabet| == K");
        cb.classifier.codebook = *reproduction_alphabet;
        std::sort(cb.classifier.codebook.begin(), cb.classifier.codebook.end());
        cb.classifier.rebuild_thresholds();
    } else {
        cb.classifier = lloyd_max(training_values, K);
    }

    std::vector<std::vector<double>> buckets(K);
    for (std::size_t t = 0; t + 1 < training_values.size(); ++t)
        buckets[cb.classifier.encode(training_values[t])].push_back(training_values[t + 1]);

    // Global codebook for re-seeding starved states.
    const ScalarQuantizer global = lloyd_max(training_values, M, reproduction_alphabet);
    cb.per_state.resize(K);
    for (std::size_t s = 0; s < K; ++s) {
        try {
            cb.per_state[s] = lloyd_max(buckets[s], M, reproduction_alphabet);
        } catch (const InsufficientSupport&) {
            cb.per_state[s] = global;
        }
    }
    return cb;
}

/// Closed-loop O-FSSQ evaluation: the state is the class of the previous
/// reconstruction; the initial state is the class of the alphabet value
/// nearest the stationary mean.
inline RunReport ofssq_run(const OFSSQCodebooks& codebooks, const FiniteSource& source,
                           std::uint64_t T, std::uint64_t seed) {
    const ProbabilityVector zeta = invariant_distribution(source);
    double mean = 0.0;
    for (std::size_t x = 0; x < source.m(); ++x) mean += zeta[x] * source.value(x);
    double nearest = source.value(0);
    for (double v : source.alphabet_values())
        if (std::abs(v - mean) < std::abs(nearest - mean)) nearest = v;
    std::size_t state = codebooks.classifier.encode(nearest);

    Rng rng(seed);
    std::size_t x = sample_index(zeta, rng);
    double total = 0.0;
    for (std::uint64_t t = 0; t < T; ++t) {
        const double v = source.value(x);
        const double xhat = codebooks.per_state[state].quantize_value(v);
        const double e = v - xhat;
        total += e * e;
        state = codebooks.classifier.encode(xhat);
        x = sample_index(source.row(x), rng);
    }

    RunReport report;
    report.T = T;
    report.seed = seed;
    report.avg_distortion = total / static_cast<double>(T);
    report.var_x = stationary_variance(source, zeta);
    report.rate_bits = std::log2(static_cast<double>(codebooks.per_state.front().levels()));
    report.snr_db = report.avg_distortion > 0.0
                        ? snr_db(report.var_x, report.avg_distortion)
                        : std::numeric_limits<double>::infinity();
    return report;
}

} // namespace zdc
