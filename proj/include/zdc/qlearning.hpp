#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "zdc/belief.hpp"
#include "zdc/common.hpp"
#include "zdc/log.hpp"
#include "zdc/markov_source.hpp"
#include "zdc/quantizer_space.hpp"
#include "zdc/simplex.hpp"

namespace zdc {

struct TrainConfig {
    int n = 5;
    double beta = 0.9999;
    double stop_epsilon = 1e-4;
    std::uint64_t check_interval = 10000;
    std::uint64_t max_steps = 5000000;
    std::uint64_t seed = 1;
    std::uint64_t min_state_visits = 10;

    void validate() const {
        if (!(beta > 0.0 && beta < 1.0)) throw Error("TrainConfig: beta must be in (0,1)");
        if (!(stop_epsilon > 0.0)) throw Error("TrainConfig: stop_epsilon must be positive");
        if (n < 1) throw Error("TrainConfig: n must be >= 1");
    }
};

/// Sparse tabular Q-factors over (quantized belief, quantizer) pairs. Only
/// visited pairs are stored; an absent pair has value 0 and no visits.
class QTable {
public:
    struct Entry {
        Quantizer action;
        double q = 0.0;
        std::uint64_t visits = 0;
    };

    struct StateCell {
        TypeVector state;
        std::vector<Entry> entries;
        std::unordered_map<std::string, std::size_t> index; // action key -> entry slot
        std::uint64_t visits = 0;

        // Cached minimum over stored entries.
        double min_cached = std::numeric_limits<double>::infinity();
        std::size_t argmin = 0;
        bool dirty = false;

        double stored_min() {
            if (dirty) {
                min_cached = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < entries.size(); ++i)
                    if (entries[i].q < min_cached) {
                        min_cached = entries[i].q;
                        argmin = i;
                    }
                dirty = false;
            }
            return min_cached;
        }
    };

    QTable() = default;
    QTable(int n, double beta, std::optional<std::uint64_t> action_count)
        : n_(n), beta_(beta), action_count_(action_count) {}

    int n() const { return n_; }
    double beta() const { return beta_; }
    std::optional<std::uint64_t> action_count() const { return action_count_; }

    std::unordered_map<std::string, StateCell>& states() { return states_; }
    const std::unordered_map<std::string, StateCell>& states() const { return states_; }

    StateCell& cell(const TypeVector& state) {
        auto [it, inserted] = states_.try_emplace(table_key(state));
        if (inserted) it->second.state = state;
        return it->second;
    }

    std::size_t entry_slot(StateCell& cell, const Quantizer& action) {
        std::string akey = table_key(TypeVector(action.map, 0));
        auto [it, inserted] = cell.index.try_emplace(std::move(akey), cell.entries.size());
        if (inserted) cell.entries.push_back(Entry{action, 0.0, 0});
        return it->second;
    }

    /// min over the whole action space of Q(state, .). Unstored actions hold
    /// their initial value 0, and stored values are nonnegative, so the
    /// minimum is 0 until every action at the state has been stored.
    double min_over_actions(const TypeVector& state) {
        const auto it = states_.find(table_key(state));
        if (it == states_.end()) return 0.0;
        StateCell& c = it->second;
        if (!action_count_ || c.entries.size() < *action_count_) return std::min(0.0, c.stored_min());
        return c.stored_min();
    }

private:
    int n_ = 0;
    double beta_ = 0.0;
    std::optional<std::uint64_t> action_count_;
    std::unordered_map<std::string, StateCell> states_;
};

/// Sup-norm distance between two Q-tables over the union of stored pairs;
/// a pair missing on one side counts as 0 there.
inline double sup_norm_delta(const QTable& a, const QTable& b) {
    if (a.n() != b.n() || a.beta() != b.beta())
        throw ConfigMismatch("sup_norm_delta: tables have different (n, beta)");
    double mx = 0.0;
    const auto scan = [&](const QTable& lhs, const QTable& rhs, bool both) {
        for (const auto& [skey, cell] : lhs.states()) {
            const auto rit = rhs.states().find(skey);
            for (const auto& [akey, slot] : cell.index) {
                const double va = cell.entries[slot].q;
                double vb = 0.0;
                bool present = false;
                if (rit != rhs.states().end()) {
                    const auto ait = rit->second.index.find(akey);
                    if (ait != rit->second.index.end()) {
                        vb = rit->second.entries[ait->second].q;
                        present = true;
                    }
                }
                if (both && present) continue; // counted in the first pass
                mx = std::max(mx, std::abs(va - vb));
            }
        }
    };
    scan(a, b, false);
    scan(b, a, true);
    return mx;
}

struct TrainStats {
    std::uint64_t steps = 0;
    std::size_t distinct_states = 0;
    double final_delta = std::numeric_limits<double>::infinity();
    bool converged = false;
};

/// Deterministic stationary encoder policy on the recurrent lattice states,
/// with a myopic fallback for beliefs quantizing outside the map.
struct Policy {
    int n = 0;
    std::unordered_map<std::string, Quantizer> action_map;
    Quantizer fallback;

    const Quantizer& at(const TypeVector& state) const {
        const auto it = action_map.find(table_key(state));
        return it == action_map.end() ? fallback : it->second;
    }
};

/// argmin_Q c(pi, Q) over the space. full mode enumerates (budget-capped);
/// convex_bins uses an exact segmentation DP, so it stays feasible for
/// large alphabets.
inline Quantizer myopic_best_quantizer(const ProbabilityVector& pi, const DistortionSpec& dist,
                                       const std::vector<double>& values,
                                       const QuantizerSpace& space) {
    if (space.mode == QuantizerMode::convex_bins) {
        const std::size_t m = space.m;
        const std::size_t M = space.M;
        // cost(i,j): optimal cost of one bin covering symbols [i, j)
        auto bin_cost = [&](std::size_t i, std::size_t j) {
            double best = 0.0;
            bool first = true;
            for (double xh : dist.reproduction_values) {
                double c = 0.0;
                for (std::size_t x = i; x < j; ++x) c += pi[x] * dist.d(values[x], xh);
                if (first || c < best) {
                    best = c;
                    first = false;
                }
            }
            return best;
        };
        // Squared-error fast path via prefix moments.
        std::vector<double> w(m + 1, 0.0), s1(m + 1, 0.0), s2(m + 1, 0.0);
        detail::SortedRepro repro(dist.reproduction_values);
        const bool sq = dist.is_squared_error();
        if (sq) {
            for (std::size_t x = 0; x < m; ++x) {
                w[x + 1] = w[x] + pi[x];
                s1[x + 1] = s1[x] + pi[x] * values[x];
                s2[x + 1] = s2[x] + pi[x] * values[x] * values[x];
            }
        }
        auto cost = [&](std::size_t i, std::size_t j) {
            if (!sq) return bin_cost(i, j);
            const double mass = w[j] - w[i];
            if (mass <= 0.0) return 0.0;
            const double m1 = s1[j] - s1[i];
            const double m2 = s2[j] - s2[i];
            const std::size_t k = repro.nearest(m1 / mass);
            const double xh = repro.values[k];
            return m2 - 2.0 * xh * m1 + mass * xh * xh;
        };
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<std::vector<double>> dp(M + 1, std::vector<double>(m + 1, inf));
        std::vector<std::vector<std::size_t>> cut(M + 1, std::vector<std::size_t>(m + 1, 0));
        dp[0][0] = 0.0;
        for (std::size_t k = 1; k <= M; ++k)
            for (std::size_t i = 0; i <= m; ++i)
                for (std::size_t j = 0; j <= i; ++j) {
                    if (dp[k - 1][j] == inf) continue;
                    const double c = dp[k - 1][j] + cost(j, i);
                    if (c < dp[k][i]) {
                        dp[k][i] = c;
                        cut[k][i] = j;
                    }
                }
        std::vector<int> map(m, 0);
        std::size_t end = m;
        for (std::size_t k = M; k >= 1; --k) {
            const std::size_t start = cut[k][end];
            for (std::size_t x = start; x < end; ++x) map[x] = static_cast<int>(k - 1);
            end = start;
            if (k == 1) break;
        }
        return Quantizer(std::move(map));
    }
    const auto all = enumerate_quantizers(space);
    double best = std::numeric_limits<double>::infinity();
    const Quantizer* best_q = nullptr;
    for (const auto& Q : all) {
        const double c = stage_cost(pi, Q, dist, values);
        if (c < best) {
            best = c;
            best_q = &Q;
        }
    }
    return *best_q;
}

/// Algorithm: quantized Q-learning over (quantized belief, quantizer) pairs
/// with uniform exploration, visit-count learning rates and single-entry
/// updates. The stage cost is evaluated at the exact belief; only the
/// Q-table key is quantized.
inline std::pair<QTable, TrainStats> train(const FiniteSource& source, const DistortionSpec& dist,
                                           const QuantizerSpace& space, const TrainConfig& cfg) {
    cfg.validate();
    if (space.m != source.m()) throw DimensionMismatch("train: space/source alphabet mismatch");
    if (space.mode == QuantizerMode::surjective)
        throw ModeMismatch("train: exploration requires full or convex_bins mode");

    Rng rng(cfg.seed);
    QTable table(cfg.n, cfg.beta, space.size());
    TrainStats stats;

    ProbabilityVector pi = source.initial_dist();
    std::size_t x = sample_index(pi, rng);
    TypeVector pihat = quantize(pi, cfg.n);
    Quantizer Q = sample_uniform(space, rng);
    int q = apply(Q, x);

    double window_max = 0.0;
    for (std::uint64_t t = 0; t < cfg.max_steps; ++t) {
        const double c = stage_cost(pi, Q, dist, source);
        const std::size_t x_next = sample_index(source.row(x), rng);
        ProbabilityVector pi_next = predictor_update(pi, Q, q, source);
        TypeVector pihat_next = quantize(pi_next, cfg.n);

        const double continuation = table.min_over_actions(pihat_next);
        QTable::StateCell& cell = table.cell(pihat);
        const std::size_t slot = table.entry_slot(cell, Q);
        QTable::Entry& e = cell.entries[slot];
        const double alpha = 1.0 / (1.0 + static_cast<double>(e.visits));
        const double target = c + cfg.beta * continuation;
        const double q_new = (1.0 - alpha) * e.q + alpha * target;
        window_max = std::max(window_max, std::abs(q_new - e.q));

        if (q_new <= cell.min_cached) {
            cell.min_cached = q_new;
            cell.argmin = slot;
            cell.dirty = false;
        } else if (slot == cell.argmin && q_new > e.q) {
            cell.dirty = true;
        }
        e.q = q_new;
        e.visits += 1;
        cell.visits += 1;

        stats.steps = t + 1;
        if ((t + 1) % cfg.check_interval == 0) {
            stats.final_delta = window_max;
            log_info("train: step=" + std::to_string(t + 1) +
                     " delta=" + std::to_string(window_max) +
                     " states=" + std::to_string(table.states().size()));
            if (window_max <= cfg.stop_epsilon) {
                stats.converged = true;
                stats.distinct_states = table.states().size();
                return {std::move(table), stats};
            }
            window_max = 0.0;
        }

        pi = std::move(pi_next);
        pihat = std::move(pihat_next);
        x = x_next;
        Q = sample_uniform(space, rng);
        q = apply(Q, x);
    }
    stats.distinct_states = table.states().size();
    // MaxStepsReached: reported via stats.converged = false, table is usable.
    return {std::move(table), stats};
}

/// Greedy policy from a trained table: per recurrent state, the visited
/// action with the smallest Q-value (ties to the lexicographically smallest
/// map); off-map beliefs fall back to the myopic argmin of the stage cost at
/// the source's invariant distribution.
inline Policy extract_policy(const QTable& table, const TrainConfig& cfg,
                             const QuantizerSpace& space, const FiniteSource& source,
                             const DistortionSpec& dist) {
    if (table.states().empty()) throw EmptyTable("extract_policy: empty table");
    Policy policy;
    policy.n = table.n();
    for (const auto& [skey, cell] : table.states()) {
        if (cell.visits < cfg.min_state_visits) continue;
        const QTable::Entry* best = nullptr;
        for (const auto& e : cell.entries) {
            if (e.visits == 0) continue;
            if (!best || e.q < best->q || (e.q == best->q && e.action < best->action)) best = &e;
        }
        if (best) policy.action_map.emplace(skey, best->action);
    }
    const ProbabilityVector zeta = invariant_distribution(source);
    policy.fallback = myopic_best_quantizer(zeta, dist, source.alphabet_values(), space);
    return policy;
}

} // namespace zdc
