#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "zdc/common.hpp"
#include "zdc/markov_source.hpp"

namespace zdc {

/// Lattice point of P_n(X): m nonnegative integer counts summing to n,
/// standing for the probability vector counts/n. Q-table row key.
struct TypeVector {
    std::vector<int> counts;
    int n = 0;

    TypeVector() = default;
    TypeVector(std::vector<int> c, int n_) : counts(std::move(c)), n(n_) {}

    ProbabilityVector as_probability() const {
        std::vector<double> p(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i)
            p[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
        ProbabilityVector r;
        r.p = std::move(p);
        return r;
    }

    friend bool operator==(const TypeVector& a, const TypeVector& b) {
        return a.n == b.n && a.counts == b.counts;
    }
};

/// Nearest neighbor of pi in P_n(X) under L2: round each coordinate, then
/// repair the count sum by adjusting the entries whose rounding error is
/// most favorable. Ties in the sort keep original index order (stable), so
/// runs are reproducible.
inline TypeVector quantize(const ProbabilityVector& pi, int n) {
    if (n < 1) throw Error("quantize: n must be >= 1");
    const std::size_t m = pi.dim();
    std::vector<int> k(m);
    long sum = 0;
    for (std::size_t i = 0; i < m; ++i) {
        k[i] = static_cast<int>(std::floor(static_cast<double>(n) * pi[i] + 0.5));
        sum += k[i];
    }
    const long delta_total = sum - n;
    if (delta_total != 0) {
        std::vector<double> delta(m);
        for (std::size_t i = 0; i < m; ++i)
            delta[i] = static_cast<double>(k[i]) - static_cast<double>(n) * pi[i];
        std::vector<std::size_t> order(m);
        for (std::size_t i = 0; i < m; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return delta[a] < delta[b]; });
        if (delta_total > 0) {
            for (long j = 0; j < delta_total; ++j) k[order[m - 1 - static_cast<std::size_t>(j)]] -= 1;
        } else {
            for (long j = 0; j < -delta_total; ++j) k[order[static_cast<std::size_t>(j)]] += 1;
        }
    }
    return TypeVector(std::move(k), n);
}

/// |P_n(X)| = binomial(n+m-1, m-1), with overflow reported.
inline std::uint64_t lattice_size(std::size_t m, std::size_t n) {
    if (m < 1) throw Error("lattice_size: m must be >= 1");
    // binomial(n+m-1, m-1)
    const std::uint64_t top = n + m - 1;
    const std::uint64_t k = std::min<std::uint64_t>(m - 1, n);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (top - k + i);
        acc /= i;
        if (acc > static_cast<unsigned __int128>(UINT64_MAX))
            throw Overflow("lattice_size: result exceeds 64-bit range");
    }
    return static_cast<std::uint64_t>(acc);
}

/// All compositions of n into m nonnegative parts, lexicographic order.
inline std::vector<TypeVector> enumerate_lattice(std::size_t m, int n,
                                                 std::uint64_t budget = 5000000) {
    std::uint64_t size;
    try {
        size = lattice_size(m, static_cast<std::size_t>(n));
    } catch (const Overflow&) {
        throw BudgetExceeded("enumerate_lattice: lattice too large");
    }
    if (size > budget) throw BudgetExceeded("enumerate_lattice: lattice exceeds budget");
    std::vector<TypeVector> out;
    out.reserve(size);
    std::vector<int> cur(m, 0);
    // Depth-first over prefix sums; lexicographic in the counts vector.
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int remaining) {
        if (pos + 1 == m) {
            cur[pos] = remaining;
            out.emplace_back(cur, n);
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            cur[pos] = c;
            rec(pos + 1, remaining - c);
        }
    };
    rec(0, n);
    return out;
}

/// Injective, stable serialization of the counts; the sparse Q-table key.
inline std::string table_key(const TypeVector& t) {
    std::string key;
    key.reserve(t.counts.size() * 3);
    for (std::size_t i = 0; i < t.counts.size(); ++i) {
        if (i) key.push_back(',');
        key += std::to_string(t.counts[i]);
    }
    return key;
}

inline TypeVector key_to_type(const std::string& key, int n) {
    std::vector<int> counts;
    std::size_t pos = 0;
    while (pos <= key.size()) {
        const std::size_t next = key.find(',', pos);
        const std::string tok = key.substr(pos, next == std::string::npos ? next : next - pos);
        counts.push_back(std::stoi(tok));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return TypeVector(std::move(counts), n);
}

/// Diagnostic upper bound sqrt(m)/n on the L2 radius of a quantization bin.
inline double max_bin_radius(std::size_t m, int n) {
    if (n < 1) throw Error("max_bin_radius: n must be >= 1");
    return std::sqrt(static_cast<double>(m)) / static_cast<double>(n);
}

inline double l2_distance(const ProbabilityVector& pi, const TypeVector& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < pi.dim(); ++i) {
        const double d = pi[i] - static_cast<double>(t.counts[i]) / static_cast<double>(t.n);
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace zdc
