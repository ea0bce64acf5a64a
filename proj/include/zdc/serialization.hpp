#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zdc/baselines.hpp"
#include "zdc/common.hpp"
#include "zdc/markov_source.hpp"
#include "zdc/qlearning.hpp"

namespace zdc {

using json = nlohmann::json;

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    return j;
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

/// Source spec: either an inline matrix
///   {"matrix": [[...]], "values": [...], "initial": [...], "normalize_rows": bool}
/// or a discretized Gauss-Markov / i.i.d. Gaussian description
///   {"gauss_markov": {"rho": r, "grid_min": a, "grid_step": s, "grid_count": k}}
///   {"iid_gaussian": {"grid_min": a, "grid_step": s, "grid_count": k}}
inline FiniteSource source_from_json(const json& j) {
    try {
        if (j.contains("gauss_markov") || j.contains("iid_gaussian")) {
            const bool iid = j.contains("iid_gaussian");
            const json& g = iid ? j.at("iid_gaussian") : j.at("gauss_markov");
            const double rho = iid ? 0.0 : g.at("rho").get<double>();
            return discretize_gauss_markov(rho, g.at("grid_min").get<double>(),
                                           g.at("grid_step").get<double>(),
                                           g.at("grid_count").get<std::size_t>());
        }
        auto P = j.at("matrix").get<std::vector<std::vector<double>>>();
        auto values = j.at("values").get<std::vector<double>>();
        if (j.value("normalize_rows", false)) {
            for (auto& row : P) {
                double sum = 0.0;
                for (double v : row) sum += v;
                if (sum <= 0.0) throw SchemaError("source: zero row cannot be normalized");
                for (double& v : row) v /= sum;
            }
        }
        std::vector<double> initial;
        if (j.contains("initial")) {
            initial = j.at("initial").get<std::vector<double>>();
        } else {
            initial.assign(P.size(), 1.0 / static_cast<double>(P.size()));
        }
        return FiniteSource(std::move(P), std::move(values), ProbabilityVector(std::move(initial)));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("source: ") + e.what());
    }
}

inline FiniteSource load_source(const std::string& path) {
    return source_from_json(read_json_file(path));
}

inline json policy_to_json(const Policy& policy) {
    json map = json::array();
    // Deterministic order: sort by state key.
    std::vector<std::string> keys;
    keys.reserve(policy.action_map.size());
    for (const auto& [k, q] : policy.action_map) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (const auto& k : keys) {
        const TypeVector state = key_to_type(k, policy.n);
        map.push_back({{"state", state.counts}, {"action", policy.action_map.at(k).map}});
    }
    return json{{"n", policy.n}, {"fallback", policy.fallback.map}, {"map", map}};
}

inline Policy policy_from_json(const json& j) {
    Policy policy;
    try {
        policy.n = j.at("n").get<int>();
        policy.fallback = Quantizer(j.at("fallback").get<std::vector<int>>());
        for (const auto& row : j.at("map")) {
            auto counts = row.at("state").get<std::vector<int>>();
            int sum = 0;
            for (int c : counts) {
                if (c < 0) throw SchemaError("policy: negative count");
                sum += c;
            }
            if (sum != policy.n) throw SchemaError("policy: state counts do not sum to n");
            auto action = row.at("action").get<std::vector<int>>();
            if (action.size() != counts.size())
                throw SchemaError("policy: action length mismatch");
            policy.action_map.emplace(table_key(TypeVector(std::move(counts), policy.n)),
                                      Quantizer(std::move(action)));
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("policy: ") + e.what());
    }
    if (policy.n < 1) throw SchemaError("policy: n must be >= 1");
    return policy;
}

inline void save_policy(const Policy& policy, const std::string& path) {
    write_json_file(path, policy_to_json(policy));
}

inline Policy load_policy(const std::string& path) {
    return policy_from_json(read_json_file(path));
}

inline json qtable_to_json(const QTable& table) {
    // Deterministic order: (state key, action key) ascending.
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& [skey, cell] : table.states())
        for (const auto& [akey, slot] : cell.index) pairs.emplace_back(skey, akey);
    std::sort(pairs.begin(), pairs.end());
    json entries = json::array();
    for (const auto& [skey, akey] : pairs) {
        const auto& cell = table.states().at(skey);
        const auto& e = cell.entries[cell.index.at(akey)];
        entries.push_back({{"state", cell.state.counts},
                           {"action", e.action.map},
                           {"q", e.q},
                           {"visits", e.visits}});
    }
    return json{{"n", table.n()}, {"beta", table.beta()}, {"entries", entries}};
}

inline QTable qtable_from_json(const json& j, std::optional<std::uint64_t> action_count) {
    try {
        QTable table(j.at("n").get<int>(), j.at("beta").get<double>(), action_count);
        for (const auto& row : j.at("entries")) {
            auto counts = row.at("state").get<std::vector<int>>();
            int sum = 0;
            for (int c : counts) sum += c;
            if (sum != table.n()) throw SchemaError("qtable: state counts do not sum to n");
            TypeVector state(std::move(counts), table.n());
            auto& cell = table.cell(state);
            const std::size_t slot =
                table.entry_slot(cell, Quantizer(row.at("action").get<std::vector<int>>()));
            cell.entries[slot].q = row.at("q").get<double>();
            cell.entries[slot].visits = row.at("visits").get<std::uint64_t>();
            cell.visits += cell.entries[slot].visits;
            cell.dirty = true;
        }
        return table;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("qtable: ") + e.what());
    }
}

inline json quantizer_to_json(const Quantizer& q) { return json(q.map); }

inline json ofssq_to_json(const OFSSQCodebooks& cb) {
    json states = json::array();
    for (const auto& sq : cb.per_state) states.push_back({{"codebook", sq.codebook}});
    return json{{"K", cb.K},
                {"classifier", {{"codebook", cb.classifier.codebook}}},
                {"per_state", states}};
}

inline OFSSQCodebooks ofssq_from_json(const json& j) {
    try {
        OFSSQCodebooks cb;
        cb.K = j.at("K").get<std::size_t>();
        cb.classifier.codebook = j.at("classifier").at("codebook").get<std::vector<double>>();
        cb.classifier.rebuild_thresholds();
        for (const auto& row : j.at("per_state")) {
            ScalarQuantizer sq;
            sq.codebook = row.at("codebook").get<std::vector<double>>();
            sq.rebuild_thresholds();
            cb.per_state.push_back(std::move(sq));
        }
        if (cb.per_state.size() != cb.K) throw SchemaError("ofssq: per_state size != K");
        return cb;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("ofssq: ") + e.what());
    }
}

} // namespace zdc
