#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "zdc/belief.hpp"
#include "zdc/common.hpp"

namespace zdc {

enum class QuantizerMode { full, surjective, convex_bins };

/// The action space: maps from the m source symbols to the M channel
/// symbols. full holds all M^m maps; convex_bins only those whose bins are
/// contiguous in alphabet-value order (empty bins allowed).
struct QuantizerSpace {
    std::size_t m = 0;
    std::size_t M = 0;
    QuantizerMode mode = QuantizerMode::full;

    /// Member count; nullopt when it exceeds the 64-bit range.
    std::optional<std::uint64_t> size() const {
        switch (mode) {
            case QuantizerMode::full: {
                unsigned __int128 acc = 1;
                for (std::size_t i = 0; i < m; ++i) {
                    acc *= M;
                    if (acc > static_cast<unsigned __int128>(UINT64_MAX)) return std::nullopt;
                }
                return static_cast<std::uint64_t>(acc);
            }
            case QuantizerMode::surjective: {
                // Inclusion-exclusion: sum_k (-1)^k C(M,k) (M-k)^m.
                long double total = 0.0L;
                unsigned __int128 exact = 0;
                bool ok = true;
                for (std::size_t k = 0; k <= M; ++k) {
                    unsigned __int128 binom = 1;
                    for (std::size_t i = 1; i <= k; ++i) binom = binom * (M - k + i) / i;
                    unsigned __int128 pw = 1;
                    for (std::size_t i = 0; i < m; ++i) {
                        pw *= (M - k);
                        if (pw > static_cast<unsigned __int128>(UINT64_MAX)) { ok = false; break; }
                    }
                    if (!ok) break;
                    if (k % 2 == 0) exact += binom * pw;
                    else exact -= binom * pw;
                    total += 0.0L;
                }
                if (!ok || exact > static_cast<unsigned __int128>(UINT64_MAX)) return std::nullopt;
                return static_cast<std::uint64_t>(exact);
            }
            case QuantizerMode::convex_bins: {
                // Compositions of m into M nonnegative parts.
                const std::uint64_t k = M - 1;
                const std::uint64_t top = m + M - 1;
                unsigned __int128 acc = 1;
                for (std::uint64_t i = 1; i <= k; ++i) {
                    acc = acc * (top - k + i);
                    acc /= i;
                    if (acc > static_cast<unsigned __int128>(UINT64_MAX)) return std::nullopt;
                }
                return static_cast<std::uint64_t>(acc);
            }
        }
        return std::nullopt;
    }
};

namespace detail {

inline void enumerate_convex_rec(std::size_t m, std::size_t M, std::size_t next_symbol,
                                 std::vector<int>& map, std::size_t pos,
                                 std::vector<Quantizer>& out) {
    if (next_symbol + 1 == M) {
        for (std::size_t i = pos; i < m; ++i) map[i] = static_cast<int>(next_symbol);
        out.emplace_back(map);
        return;
    }
    // Bin sizes descending so the emitted maps are lexicographically
    // increasing.
    for (std::size_t len = m - pos + 1; len-- > 0;) {
        for (std::size_t i = 0; i < len; ++i) map[pos + i] = static_cast<int>(next_symbol);
        enumerate_convex_rec(m, M, next_symbol + 1, map, pos + len, out);
    }
}

} // namespace detail

/// Every member of the space exactly once, lexicographic in the map array.
inline std::vector<Quantizer> enumerate_quantizers(const QuantizerSpace& space,
                                                   std::uint64_t budget = 5000000) {
    const auto sz = space.size();
    if (!sz || *sz > budget) throw BudgetExceeded("enumerate_quantizers: space exceeds budget");
    std::vector<Quantizer> out;
    out.reserve(*sz);
    if (space.mode == QuantizerMode::convex_bins) {
        std::vector<int> map(space.m, 0);
        detail::enumerate_convex_rec(space.m, space.M, 0, map, 0, out);
        return out;
    }
    // Odometer over maps, most significant digit first => lexicographic.
    std::vector<int> map(space.m, 0);
    while (true) {
        bool keep = true;
        if (space.mode == QuantizerMode::surjective) {
            std::vector<bool> hit(space.M, false);
            for (int v : map) hit[static_cast<std::size_t>(v)] = true;
            keep = std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
        }
        if (keep) out.emplace_back(map);
        std::size_t i = space.m;
        while (i-- > 0) {
            if (++map[i] < static_cast<int>(space.M)) break;
            map[i] = 0;
            if (i == 0) return out;
        }
    }
}

/// Uniform draw from the space. full mode uses m independent symbol draws
/// (each of the M^m maps has probability M^-m); convex_bins draws a uniform
/// composition of m into M parts via random bar placement.
inline Quantizer sample_uniform(const QuantizerSpace& space, Rng& rng) {
    if (space.mode == QuantizerMode::full) {
        std::vector<int> map(space.m);
        for (std::size_t x = 0; x < space.m; ++x)
            map[x] = static_cast<int>(rng.next_below(space.M));
        return Quantizer(std::move(map));
    }
    if (space.mode == QuantizerMode::convex_bins) {
        // Choose M-1 distinct bar slots among m+M-1 positions.
        const std::uint64_t slots = space.m + space.M - 1;
        std::vector<std::uint64_t> bars;
        bars.reserve(space.M - 1);
        // Floyd's sampling: uniform over subsets, deterministic given rng.
        for (std::uint64_t j = slots - (space.M - 1); j < slots; ++j) {
            const std::uint64_t t = rng.next_below(j + 1);
            if (std::find(bars.begin(), bars.end(), t) == bars.end()) bars.push_back(t);
            else bars.push_back(j);
        }
        std::sort(bars.begin(), bars.end());
        std::vector<int> map(space.m);
        std::size_t pos = 0;
        std::uint64_t prev = 0;
        int symbol = 0;
        for (std::uint64_t b : bars) {
            const std::uint64_t len = b - prev;
            for (std::uint64_t i = 0; i < len; ++i) map[pos++] = symbol;
            prev = b + 1;
            ++symbol;
        }
        while (pos < space.m) map[pos++] = symbol;
        return Quantizer(std::move(map));
    }
    throw ModeMismatch("sample_uniform: unsupported mode");
}

} // namespace zdc
