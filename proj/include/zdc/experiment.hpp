#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "zdc/baselines.hpp"
#include "zdc/evaluation.hpp"
#include "zdc/log.hpp"
#include "zdc/qlearning.hpp"
#include "zdc/serialization.hpp"

namespace zdc {

struct Algorithm1Method {
    TrainConfig train;
    QuantizerMode space_mode = QuantizerMode::full;
};

struct OfssqMethod {
    std::size_t K = 0;
    ClassifierMode classifier = ClassifierMode::identity;
};

struct LloydMaxMethod {};

struct MethodSpec {
    std::string name;
    std::optional<Algorithm1Method> algorithm1;
    std::optional<OfssqMethod> ofssq;
    std::optional<LloydMaxMethod> lloyd_max;
};

struct ExperimentConfig {
    json source_spec;
    std::vector<MethodSpec> methods;
    std::vector<std::size_t> rates; // channel alphabet sizes M
    std::uint64_t eval_samples = 1000000;
    std::uint64_t train_samples = 1000000;
    std::vector<std::uint64_t> seeds{1};
    std::string baseline; // method name for the gains summary, optional
    std::string results_path = "results.csv";
    std::string artifacts_dir = "artifacts";
};

inline ExperimentConfig parse_experiment_config(const json& j) {
    ExperimentConfig cfg;
    try {
        if (!j.contains("source")) throw ConfigParse("config: missing source");
        cfg.source_spec = j.at("source");
        if (!j.contains("methods") || !j.at("methods").is_array() || j.at("methods").empty())
            throw ConfigParse("config: methods must be a non-empty list");
        for (const auto& mj : j.at("methods")) {
            MethodSpec spec;
            if (mj.contains("algorithm1")) {
                const json& a = mj.at("algorithm1");
                Algorithm1Method m;
                m.train.n = a.value("n", 5);
                m.train.beta = a.value("beta", 0.9999);
                m.train.stop_epsilon = a.value("stop_epsilon", 1e-4);
                m.train.max_steps = a.value("max_steps", std::uint64_t(5000000));
                m.train.check_interval = a.value("check_interval", std::uint64_t(10000));
                m.train.min_state_visits = a.value("min_state_visits", std::uint64_t(10));
                const std::string mode = a.value("space", std::string("full"));
                if (mode == "full") m.space_mode = QuantizerMode::full;
                else if (mode == "convex_bins") m.space_mode = QuantizerMode::convex_bins;
                else throw ConfigParse("config: unknown quantizer space mode " + mode);
                spec.algorithm1 = m;
                spec.name = "algorithm1_n" + std::to_string(m.train.n);
            } else if (mj.contains("ofssq")) {
                const json& o = mj.at("ofssq");
                OfssqMethod m;
                m.K = o.at("K").get<std::size_t>();
                const std::string cl = o.value("classifier", std::string("identity"));
                if (cl == "identity") m.classifier = ClassifierMode::identity;
                else if (cl == "lloyd_max") m.classifier = ClassifierMode::lloyd_max;
                else throw ConfigParse("config: unknown classifier mode " + cl);
                spec.ofssq = m;
                spec.name = "ofssq_k" + std::to_string(m.K);
            } else if (mj.contains("lloyd_max")) {
                spec.lloyd_max = LloydMaxMethod{};
                spec.name = "lloyd_max";
            } else {
                throw ConfigParse("config: unknown method entry");
            }
            if (mj.contains("name")) spec.name = mj.at("name").get<std::string>();
            cfg.methods.push_back(std::move(spec));
        }
        if (!j.contains("rates") || j.at("rates").empty())
            throw ConfigParse("config: rates must be a non-empty list of M values");
        cfg.rates = j.at("rates").get<std::vector<std::size_t>>();
        cfg.eval_samples = j.value("eval_samples", std::uint64_t(1000000));
        cfg.train_samples = j.value("train_samples", std::uint64_t(1000000));
        if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        cfg.baseline = j.value("baseline", std::string());
        if (j.contains("output")) {
            cfg.results_path = j.at("output").value("results", cfg.results_path);
            cfg.artifacts_dir = j.at("output").value("artifacts_dir", cfg.artifacts_dir);
        }
    } catch (const json::exception& e) {
        throw ConfigParse(std::string("config: ") + e.what());
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(read_json_file(path));
}

struct ResultRow {
    std::string method;
    double rate_bits = 0.0;
    int n = 0;          // lattice parameter, 0 for baselines
    std::size_t K = 0;  // O-FSSQ state count, 0 otherwise
    std::uint64_t T = 0;
    std::uint64_t seed = 0;
    double avg_distortion = 0.0;
    double snr_db = 0.0;
    bool lossless = false;
    bool failed = false;
    std::string error;
};

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string csv_header() { return "method,rate_bits,n,K,T,seed,avg_distortion,snr_db"; }

inline std::string to_csv_row(const ResultRow& r) {
    std::ostringstream os;
    os << r.method << ',' << format_double(r.rate_bits) << ',' << r.n << ',' << r.K << ',' << r.T
       << ',' << r.seed << ',';
    if (r.failed) {
        os << "failed,failed";
    } else {
        os << format_double(r.avg_distortion) << ','
           << (r.lossless ? std::string("inf") : format_double(r.snr_db));
    }
    return os.str();
}

namespace detail {

struct Cell {
    std::size_t method_idx;
    std::size_t M;
    std::uint64_t seed;
};

inline ResultRow run_cell(const ExperimentConfig& cfg, const FiniteSource& source,
                          const MethodSpec& method, std::size_t M, std::uint64_t seed,
                          bool persist_artifacts) {
    ResultRow row;
    row.method = method.name;
    row.rate_bits = std::log2(static_cast<double>(M));
    row.T = cfg.eval_samples;
    row.seed = seed;

    const DistortionSpec dist = DistortionSpec::squared_error(source.alphabet_values());
    const std::string tag = method.name + "_M" + std::to_string(M) + "_seed" + std::to_string(seed);

    RunReport report;
    if (method.algorithm1) {
        TrainConfig tc = method.algorithm1->train;
        tc.seed = seed;
        row.n = tc.n;
        QuantizerSpace space{source.m(), M, method.algorithm1->space_mode};
        auto [table, stats] = train(source, dist, space, tc);
        log_info(tag + ": trained, steps=" + std::to_string(stats.steps) +
                 " states=" + std::to_string(stats.distinct_states) +
                 (stats.converged ? "" : " (max steps reached)"));
        const Policy policy = extract_policy(table, tc, space, source, dist);
        if (persist_artifacts)
            save_policy(policy, cfg.artifacts_dir + "/" + tag + ".policy.json");
        report = evaluate_policy(source, policy, dist, cfg.eval_samples, seed);
    } else if (method.ofssq) {
        row.K = method.ofssq->K;
        Rng rng(seed);
        const auto path = sample_path(source, cfg.train_samples, rng);
        std::vector<double> values(path.size());
        for (std::size_t i = 0; i < path.size(); ++i) values[i] = source.value(path[i]);
        const auto cb = train_ofssq(values, method.ofssq->K, M, method.ofssq->classifier,
                                    source.alphabet_values());
        if (persist_artifacts)
            write_json_file(cfg.artifacts_dir + "/" + tag + ".ofssq.json", ofssq_to_json(cb));
        report = ofssq_run(cb, source, cfg.eval_samples, seed);
    } else {
        // Memoryless Lloyd-Max designed on the stationary distribution,
        // evaluated as an O-FSSQ with a single state.
        const ProbabilityVector zeta = invariant_distribution(source);
        const ScalarQuantizer sq =
            lloyd_max(source.alphabet_values(), zeta, M, source.alphabet_values());
        OFSSQCodebooks cb;
        cb.K = 1;
        cb.classifier.codebook = {0.0};
        cb.classifier.rebuild_thresholds();
        cb.per_state = {sq};
        if (persist_artifacts)
            write_json_file(cfg.artifacts_dir + "/" + tag + ".lloyd.json",
                            json{{"codebook", sq.codebook}});
        report = ofssq_run(cb, source, cfg.eval_samples, seed);
    }

    row.avg_distortion = report.avg_distortion;
    row.snr_db = report.snr_db;
    row.lossless = report.lossless();
    row.rate_bits = std::log2(static_cast<double>(M));
    return row;
}

} // namespace detail

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::size_t failed_cells = 0;
};

/// Run every (method, rate, seed) cell, persist artifacts and append rows
/// to the results CSV. Cells run in parallel up to `workers`; the CSV is
/// written once, in a deterministic order, so output bytes do not depend on
/// scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers = 1,
                                       bool train_only = false) {
    const FiniteSource source = source_from_json(cfg.source_spec);
    std::filesystem::create_directories(cfg.artifacts_dir);

    std::vector<detail::Cell> cells;
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
        for (std::size_t M : cfg.rates)
            for (std::uint64_t seed : cfg.seeds) cells.push_back({mi, M, seed});

    std::vector<ResultRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failed{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const auto& cell = cells[i];
            const auto& method = cfg.methods[cell.method_idx];
            if (train_only && !method.algorithm1) {
                rows[i].method = method.name;
                rows[i].failed = true;
                rows[i].error = "skipped (train-only run)";
                continue;
            }
            try {
                rows[i] = detail::run_cell(cfg, source, method, cell.M, cell.seed, true);
            } catch (const std::exception& e) {
                rows[i].method = method.name;
                rows[i].rate_bits = std::log2(static_cast<double>(cell.M));
                rows[i].T = cfg.eval_samples;
                rows[i].seed = cell.seed;
                rows[i].failed = true;
                rows[i].error = e.what();
                failed.fetch_add(1);
                log_info(method.name + " M=" + std::to_string(cell.M) + " failed: " + e.what());
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned count = std::max(1u, workers);
    for (unsigned w = 0; w + 1 < count; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    if (!train_only) {
        std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
            if (a.method != b.method) return a.method < b.method;
            if (a.rate_bits != b.rate_bits) return a.rate_bits < b.rate_bits;
            return a.seed < b.seed;
        });
        std::ofstream out(cfg.results_path);
        if (!out) throw IoError("cannot write " + cfg.results_path);
        out << csv_header() << "\n";
        for (const auto& r : rows)
            if (!(train_only && r.failed)) out << to_csv_row(r) << "\n";
    }

    ExperimentResult result;
    result.rows = std::move(rows);
    result.failed_cells = failed.load();
    return result;
}

/// SNR gain summary of each method against the configured baseline, printed
/// as "method M gain_db" lines.
inline std::string gains_summary(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
    if (cfg.baseline.empty()) return "";
    std::map<std::pair<double, std::uint64_t>, double> baseline_snr;
    for (const auto& r : rows)
        if (!r.failed && r.method == cfg.baseline) baseline_snr[{r.rate_bits, r.seed}] = r.snr_db;
    std::ostringstream os;
    os << "SNR gain vs " << cfg.baseline << " (dB):\n";
    for (const auto& r : rows) {
        if (r.failed || r.method == cfg.baseline) continue;
        const auto it = baseline_snr.find({r.rate_bits, r.seed});
        if (it == baseline_snr.end()) continue;
        os << "  " << r.method << " R=" << r.rate_bits << " seed=" << r.seed << " gain="
           << (r.snr_db - it->second) << "\n";
    }
    return os.str();
}

/// Pivot a results CSV into per-figure plot data: one row per rate, one SNR
/// column per method, SNR averaged over seeds. Throws MissingMethod when a
/// method has no data for a rate that other methods cover.
inline void emit_plot_data(const std::string& results_csv, const std::string& out_path) {
    std::ifstream in(results_csv);
    if (!in) throw IoError("cannot open " + results_csv);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(results_csv + ": empty file");
    std::map<std::string, std::map<double, std::pair<double, std::size_t>>> acc; // method -> rate -> (sum, count)
    std::set<double> rates;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
        if (fields.size() < 8) throw SchemaError(results_csv + ": malformed row: " + line);
        if (fields[7] == "failed") continue;
        const std::string& method = fields[0];
        const double rate = std::stod(fields[1]);
        const double snr = fields[7] == "inf" ? std::numeric_limits<double>::infinity()
                                              : std::stod(fields[7]);
        auto& slot = acc[method][rate];
        slot.first += snr;
        slot.second += 1;
        rates.insert(rate);
    }
    if (acc.empty()) throw SchemaError(results_csv + ": no usable rows");
    for (const auto& [method, per_rate] : acc)
        for (double rate : rates)
            if (!per_rate.count(rate))
                throw MissingMethod("emit_plot_data: method " + method + " missing rate " +
                                    format_double(rate));
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    out << "rate";
    for (const auto& [method, per_rate] : acc) out << ',' << method;
    out << "\n";
    for (double rate : rates) {
        out << format_double(rate);
        for (const auto& [method, per_rate] : acc) {
            const auto& slot = per_rate.at(rate);
            out << ',' << format_double(slot.first / static_cast<double>(slot.second));
        }
        out << "\n";
    }
}

} // namespace zdc
