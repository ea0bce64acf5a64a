#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "zdc/common.hpp"
#include "zdc/markov_source.hpp"

namespace zdc {

/// A quantizer: map from source symbols {0..m-1} to channel symbols
/// {0..M-1}. The MDP action. Value object, compared by its map array.
struct Quantizer {
    std::vector<int> map;

    Quantizer() = default;
    explicit Quantizer(std::vector<int> q) : map(std::move(q)) {}

    std::size_t m() const { return map.size(); }

    static Quantizer identity(std::size_t m) {
        std::vector<int> q(m);
        for (std::size_t i = 0; i < m; ++i) q[i] = static_cast<int>(i);
        return Quantizer(std::move(q));
    }

    static Quantizer uninformative(std::size_t m) { return Quantizer(std::vector<int>(m, 0)); }

    friend bool operator==(const Quantizer& a, const Quantizer& b) { return a.map == b.map; }
    friend bool operator<(const Quantizer& a, const Quantizer& b) { return a.map < b.map; }
};

inline int apply(const Quantizer& Q, std::size_t x) {
    if (x >= Q.map.size()) throw SymbolOutOfRange("apply: symbol out of range");
    return Q.map[x];
}

/// Distortion measure d(x_value, xhat_value) plus the finite reproduction
/// alphabet. A null `custom` means squared error, which enables closed-form
/// fast paths in stage_cost and optimal_reconstruction.
struct DistortionSpec {
    std::vector<double> reproduction_values;
    std::function<double(double, double)> custom; // empty => squared error

    bool is_squared_error() const { return !custom; }

    double d(double x, double xhat) const {
        if (custom) return custom(x, xhat);
        const double e = x - xhat;
        return e * e;
    }

    double max_d(const std::vector<double>& source_values) const {
        double mx = 0.0;
        for (double x : source_values)
            for (double xh : reproduction_values) mx = std::max(mx, d(x, xh));
        return mx;
    }

    static DistortionSpec squared_error(std::vector<double> reproduction_values) {
        return DistortionSpec{std::move(reproduction_values), nullptr};
    }
};

/// Total variation distance; on finite alphabets the sup-functional form
/// equals the L1 distance, with values in [0,2].
inline double tv_distance(const ProbabilityVector& a, const ProbabilityVector& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("tv_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

/// Bayes update of the predictor given the realized channel symbol:
/// pibar(x) = pi(x) 1{Q(x)=q} / pi(Q^{-1}(q)).
inline ProbabilityVector filter_from_predictor(const ProbabilityVector& pi, const Quantizer& Q,
                                               int q) {
    if (pi.dim() != Q.m()) throw DimensionMismatch("filter_from_predictor: dimension mismatch");
    double mass = 0.0;
    for (std::size_t x = 0; x < pi.dim(); ++x)
        if (Q.map[x] == q) mass += pi[x];
    if (mass <= 1e-12) throw ZeroMassBin("filter_from_predictor: realized symbol has no mass");
    std::vector<double> out(pi.dim(), 0.0);
    for (std::size_t x = 0; x < pi.dim(); ++x)
        if (Q.map[x] == q) out[x] = pi[x] / mass;
    ProbabilityVector r;
    r.p = std::move(out);
    return r;
}

/// One-step predictor recursion: Bayes update on the realized bin followed
/// by the transition kernel. Renormalized to cancel float drift.
inline ProbabilityVector predictor_update(const ProbabilityVector& pi, const Quantizer& Q, int q,
                                          const FiniteSource& source) {
    const std::size_t m = pi.dim();
    if (m != Q.m() || m != source.m())
        throw DimensionMismatch("predictor_update: dimension mismatch");
    double mass = 0.0;
    for (std::size_t x = 0; x < m; ++x)
        if (Q.map[x] == q) mass += pi[x];
    if (mass <= 1e-12) throw ZeroMassBin("predictor_update: realized symbol has no mass");
    std::vector<double> out(m, 0.0);
    for (std::size_t x = 0; x < m; ++x) {
        if (Q.map[x] != q || pi[x] == 0.0) continue;
        const double w = pi[x] / mass;
        const auto& row = source.row(x);
        for (std::size_t y = 0; y < m; ++y) out[y] += w * row[y];
    }
    double sum = 0.0;
    for (double v : out) sum += v;
    for (double& v : out) v /= sum;
    ProbabilityVector r;
    r.p = std::move(out);
    return r;
}

namespace detail {

// Reproduction alphabet sorted by value, remembering original indices so tie
// rules stay index-based.
struct SortedRepro {
    std::vector<double> values;
    std::vector<std::size_t> index;

    explicit SortedRepro(const std::vector<double>& repro) {
        index.resize(repro.size());
        for (std::size_t i = 0; i < repro.size(); ++i) index[i] = i;
        std::stable_sort(index.begin(), index.end(),
                         [&](std::size_t a, std::size_t b) { return repro[a] < repro[b]; });
        values.resize(repro.size());
        for (std::size_t i = 0; i < repro.size(); ++i) values[i] = repro[index[i]];
    }

    // Position (in sorted order) of the value nearest to t; equidistant pair
    // resolved toward the lower original index.
    std::size_t nearest(double t) const {
        const auto it = std::lower_bound(values.begin(), values.end(), t);
        if (it == values.begin()) return 0;
        if (it == values.end()) return values.size() - 1;
        const std::size_t hi = static_cast<std::size_t>(it - values.begin());
        const std::size_t lo = hi - 1;
        const double dlo = t - values[lo];
        const double dhi = values[hi] - t;
        if (dlo < dhi) return lo;
        if (dhi < dlo) return hi;
        return index[lo] < index[hi] ? lo : hi;
    }
};

} // namespace detail

/// Expected one-step distortion of using quantizer Q at belief pi with the
/// optimal decoder: sum over bins of min_xhat sum_{x in bin} pi(x) d(x,xhat).
inline double stage_cost(const ProbabilityVector& pi, const Quantizer& Q,
                         const DistortionSpec& dist, const std::vector<double>& source_values) {
    const std::size_t m = pi.dim();
    int M = 0;
    for (int q : Q.map) M = std::max(M, q + 1);
    if (dist.is_squared_error()) {
        // Per-bin moments; best xhat per bin is a nearest alphabet member to
        // the bin centroid.
        static thread_local std::vector<double> w, s1, s2;
        w.assign(M, 0.0);
        s1.assign(M, 0.0);
        s2.assign(M, 0.0);
        for (std::size_t x = 0; x < m; ++x) {
            const int b = Q.map[x];
            const double px = pi[x];
            const double v = source_values[x];
            w[b] += px;
            s1[b] += px * v;
            s2[b] += px * v * v;
        }
        detail::SortedRepro repro(dist.reproduction_values);
        double cost = 0.0;
        for (int b = 0; b < M; ++b) {
            if (w[b] <= 0.0) continue;
            const double centroid = s1[b] / w[b];
            const std::size_t k = repro.nearest(centroid);
            double best = s2[b] - 2.0 * repro.values[k] * s1[b] + w[b] * repro.values[k] * repro.values[k];
            // Neighbors of the centroid's nearest point cannot beat it for
            // squared error, but guard against float edge cases.
            for (std::size_t kk : {k > 0 ? k - 1 : k, std::min(k + 1, repro.values.size() - 1)}) {
                const double c = s2[b] - 2.0 * repro.values[kk] * s1[b] + w[b] * repro.values[kk] * repro.values[kk];
                best = std::min(best, c);
            }
            cost += best;
        }
        return std::max(cost, 0.0);
    }
    double cost = 0.0;
    for (int b = 0; b < M; ++b) {
        double best = std::numeric_limits<double>::infinity();
        bool empty = true;
        for (double xh : dist.reproduction_values) {
            double c = 0.0;
            for (std::size_t x = 0; x < m; ++x) {
                if (Q.map[x] != b || pi[x] == 0.0) continue;
                empty = false;
                c += pi[x] * dist.d(source_values[x], xh);
            }
            best = std::min(best, c);
        }
        if (!empty) cost += best;
    }
    return cost;
}

inline double stage_cost(const ProbabilityVector& pi, const Quantizer& Q,
                         const DistortionSpec& dist, const FiniteSource& source) {
    return stage_cost(pi, Q, dist, source.alphabet_values());
}

/// Optimal decoder output at a filter: argmin over the reproduction alphabet
/// of the expected distortion; ties toward the lowest-index value.
inline double optimal_reconstruction(const ProbabilityVector& pi_bar, const DistortionSpec& dist,
                                     const std::vector<double>& source_values) {
    if (dist.is_squared_error()) {
        double mean = 0.0;
        for (std::size_t x = 0; x < pi_bar.dim(); ++x) mean += pi_bar[x] * source_values[x];
        detail::SortedRepro repro(dist.reproduction_values);
        const std::size_t k = repro.nearest(mean);
        return repro.values[k];
    }
    double best = std::numeric_limits<double>::infinity();
    double best_val = dist.reproduction_values.front();
    for (double xh : dist.reproduction_values) {
        double c = 0.0;
        for (std::size_t x = 0; x < pi_bar.dim(); ++x)
            if (pi_bar[x] > 0.0) c += pi_bar[x] * dist.d(source_values[x], xh);
        if (c < best) {
            best = c;
            best_val = xh;
        }
    }
    return best_val;
}

inline double optimal_reconstruction(const ProbabilityVector& pi_bar, const DistortionSpec& dist,
                                     const FiniteSource& source) {
    return optimal_reconstruction(pi_bar, dist, source.alphabet_values());
}

} // namespace zdc
