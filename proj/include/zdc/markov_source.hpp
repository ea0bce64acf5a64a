#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <queue>
#include <vector>

#include "zdc/common.hpp"

namespace zdc {

/// Point on the m-simplex. Used for predictors, filters and invariant
/// distributions alike.
struct ProbabilityVector {
    std::vector<double> p;

    ProbabilityVector() = default;
    explicit ProbabilityVector(std::vector<double> probs) : p(std::move(probs)) { validate(); }

    std::size_t dim() const { return p.size(); }
    double operator[](std::size_t i) const { return p[i]; }

    void validate() const {
        double sum = 0.0;
        for (double v : p) {
            if (!(v >= 0.0) || v > 1.0 + 1e-12)
                throw Error("ProbabilityVector: entry outside [0,1]");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw Error("ProbabilityVector: entries do not sum to 1");
    }

    static ProbabilityVector uniform(std::size_t m) {
        return ProbabilityVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
    }

    friend bool operator==(const ProbabilityVector& a, const ProbabilityVector& b) {
        return a.p == b.p;
    }
};

namespace detail {

// Reachability over positive entries starting at `start`; `transpose` walks
// edges backwards.
inline std::vector<bool> reachable(const std::vector<std::vector<double>>& P, std::size_t start,
                                   bool transpose) {
    const std::size_t m = P.size();
    std::vector<bool> seen(m, false);
    std::queue<std::size_t> q;
    seen[start] = true;
    q.push(start);
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v = 0; v < m; ++v) {
            const double w = transpose ? P[v][u] : P[u][v];
            if (w > 0.0 && !seen[v]) {
                seen[v] = true;
                q.push(v);
            }
        }
    }
    return seen;
}

} // namespace detail

/// Finite-alphabet Markov source: row-stochastic transition matrix plus the
/// numeric value carried by each symbol. Immutable after construction.
class FiniteSource {
public:
    FiniteSource(std::vector<std::vector<double>> P, std::vector<double> alphabet_values,
                 ProbabilityVector initial_dist)
        : P_(std::move(P)), values_(std::move(alphabet_values)), initial_(std::move(initial_dist)) {
        const std::size_t m = P_.size();
        if (m == 0) throw Error("FiniteSource: empty matrix");
        if (values_.size() != m || initial_.dim() != m)
            throw DimensionMismatch("FiniteSource: dimension mismatch");
        for (const auto& row : P_) {
            if (row.size() != m) throw NonStochasticRow("FiniteSource: matrix not square");
            double sum = 0.0;
            for (double v : row) {
                if (v < 0.0) throw NonStochasticRow("FiniteSource: negative entry");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw NonStochasticRow("FiniteSource: row does not sum to 1");
        }
        check_irreducible_aperiodic();
    }

    std::size_t m() const { return P_.size(); }
    const std::vector<std::vector<double>>& matrix() const { return P_; }
    const std::vector<double>& row(std::size_t x) const { return P_[x]; }
    const std::vector<double>& alphabet_values() const { return values_; }
    double value(std::size_t x) const { return values_[x]; }
    const ProbabilityVector& initial_dist() const { return initial_; }

private:
    void check_irreducible_aperiodic() const {
        const std::size_t m = P_.size();
        const auto fwd = detail::reachable(P_, 0, false);
        const auto bwd = detail::reachable(P_, 0, true);
        for (std::size_t i = 0; i < m; ++i)
            if (!fwd[i] || !bwd[i]) throw Reducible("FiniteSource: chain is reducible");
        // Period = gcd over edges (u,v) of dist(u)+1-dist(v), dist from BFS.
        std::vector<long> dist(m, -1);
        std::queue<std::size_t> q;
        dist[0] = 0;
        q.push(0);
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (std::size_t v = 0; v < m; ++v)
                if (P_[u][v] > 0.0 && dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
        }
        long g = 0;
        for (std::size_t u = 0; u < m; ++u)
            for (std::size_t v = 0; v < m; ++v)
                if (P_[u][v] > 0.0) g = std::gcd(g, dist[u] + 1 - dist[v]);
        if (std::abs(g) != 1) throw Periodic("FiniteSource: chain is periodic");
    }

    std::vector<std::vector<double>> P_;
    std::vector<double> values_;
    ProbabilityVector initial_;
};

inline FiniteSource new_finite_source(std::vector<std::vector<double>> P,
                                      std::vector<double> alphabet_values,
                                      ProbabilityVector initial_dist) {
    return FiniteSource(std::move(P), std::move(alphabet_values), std::move(initial_dist));
}

/// Unique invariant distribution via power iteration (L1 fixed-point
/// tolerance 1e-12, cap 1e6 iterations).
inline ProbabilityVector invariant_distribution(const FiniteSource& source) {
    const std::size_t m = source.m();
    std::vector<double> pi(m, 1.0 / static_cast<double>(m));
    std::vector<double> next(m);
    for (std::uint64_t iter = 0; iter < 1000000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t x = 0; x < m; ++x) {
            const auto& row = source.row(x);
            const double px = pi[x];
            if (px == 0.0) continue;
            for (std::size_t y = 0; y < m; ++y) next[y] += px * row[y];
        }
        double l1 = 0.0;
        for (std::size_t y = 0; y < m; ++y) l1 += std::abs(next[y] - pi[y]);
        pi.swap(next);
        if (l1 < 1e-12) {
            const double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
            for (double& v : pi) v /= sum;
            return ProbabilityVector(std::move(pi));
        }
    }
    throw NoConvergence("invariant_distribution: iteration cap exceeded");
}

/// Sample an index from a probability vector by CDF inversion.
inline std::size_t sample_index(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;
}

inline std::size_t sample_index(const ProbabilityVector& pv, Rng& rng) {
    return sample_index(pv.p, rng);
}

/// Length-T realization, X_0 ~ initial_dist.
inline std::vector<std::size_t> sample_path(const FiniteSource& source, std::size_t T, Rng& rng) {
    if (T < 1) throw Error("sample_path: T must be >= 1");
    std::vector<std::size_t> path(T);
    path[0] = sample_index(source.initial_dist(), rng);
    for (std::size_t t = 1; t < T; ++t) path[t] = sample_index(source.row(path[t - 1]), rng);
    return path;
}

inline std::vector<std::size_t> sample_path(const FiniteSource& source, std::size_t T,
                                            std::uint64_t seed) {
    Rng rng(seed);
    return sample_path(source, T, rng);
}

namespace detail {

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Cell probabilities of N(mu, sigma^2) over the grid; outer cells absorb the
// tails so every row is exactly stochastic.
inline std::vector<double> discretized_normal(double mu, double sigma, double grid_min,
                                              double grid_step, std::size_t grid_count) {
    std::vector<double> probs(grid_count);
    double prev_cdf = 0.0;
    for (std::size_t i = 0; i < grid_count; ++i) {
        double cdf;
        if (i + 1 == grid_count) {
            cdf = 1.0;
        } else {
            const double upper = grid_min + grid_step * (static_cast<double>(i) + 0.5);
            cdf = std_normal_cdf((upper - mu) / sigma);
        }
        probs[i] = cdf - prev_cdf;
        prev_cdf = cdf;
    }
    return probs;
}

} // namespace detail

/// Discretize a Gauss-Markov source X_{t+1} = rho X_t + W_t with stationary
/// marginal N(0,1): row x is N(rho*v_x, 1-rho^2) integrated over the cells.
/// rho = 0 gives an i.i.d. discretized standard Gaussian.
inline FiniteSource discretize_gauss_markov(double rho, double grid_min, double grid_step,
                                            std::size_t grid_count) {
    if (!(std::abs(rho) < 1.0)) throw InvalidCorrelation("discretize_gauss_markov: |rho| >= 1");
    if (grid_count < 2) throw Error("discretize_gauss_markov: grid_count < 2");
    const double sigma = std::sqrt(1.0 - rho * rho);
    std::vector<double> values(grid_count);
    for (std::size_t i = 0; i < grid_count; ++i)
        values[i] = grid_min + grid_step * static_cast<double>(i);
    std::vector<std::vector<double>> P(grid_count);
    for (std::size_t x = 0; x < grid_count; ++x)
        P[x] = detail::discretized_normal(rho * values[x], sigma, grid_min, grid_step, grid_count);
    auto initial = ProbabilityVector(detail::discretized_normal(0.0, 1.0, grid_min, grid_step, grid_count));
    return FiniteSource(std::move(P), std::move(values), std::move(initial));
}

/// Stationary variance of the numeric source values under zeta.
inline double stationary_variance(const FiniteSource& source, const ProbabilityVector& zeta) {
    double mean = 0.0;
    for (std::size_t x = 0; x < source.m(); ++x) mean += zeta[x] * source.value(x);
    double var = 0.0;
    for (std::size_t x = 0; x < source.m(); ++x) {
        const double d = source.value(x) - mean;
        var += zeta[x] * d * d;
    }
    return var;
}

} // namespace zdc
