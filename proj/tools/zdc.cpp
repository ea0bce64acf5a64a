#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "zdc/experiment.hpp"

namespace {

int cmd_experiment(const std::string& config_path, unsigned workers, bool train_only) {
    const auto cfg = zdc::load_experiment_config(config_path);
    const auto result = zdc::run_experiment(cfg, workers, train_only);
    if (train_only) {
        std::cout << "trained policies written to " << cfg.artifacts_dir << "\n";
    } else {
        std::cout << "results written to " << cfg.results_path << "\n";
        const std::string summary = zdc::gains_summary(cfg, result.rows);
        if (!summary.empty()) std::cout << summary;
    }
    std::size_t runnable = 0;
    for (const auto& r : result.rows)
        if (!(train_only && r.error == "skipped (train-only run)")) ++runnable;
    for (const auto& r : result.rows)
        if (r.failed && r.error != "skipped (train-only run)")
            std::cerr << "cell failed: " << r.method << " R=" << r.rate_bits
                      << " seed=" << r.seed << ": " << r.error << "\n";
    if (runnable > 0 && result.failed_cells >= runnable) return 1;
    return 0;
}

int cmd_eval(const std::string& policy_path, const std::string& source_path, std::uint64_t samples,
             std::uint64_t seed, int expected_n) {
    const auto policy = zdc::load_policy(policy_path);
    if (expected_n > 0 && expected_n != policy.n)
        throw zdc::PolicyConfigMismatch("eval: policy has n=" + std::to_string(policy.n) +
                                        ", requested n=" + std::to_string(expected_n));
    const auto source = zdc::load_source(source_path);
    const auto dist = zdc::DistortionSpec::squared_error(source.alphabet_values());
    const auto report = zdc::evaluate_policy(source, policy, dist, samples, seed);
    std::cout << zdc::csv_header() << "\n";
    zdc::ResultRow row;
    row.method = "policy";
    row.rate_bits = report.rate_bits;
    row.n = policy.n;
    row.T = report.T;
    row.seed = report.seed;
    row.avg_distortion = report.avg_distortion;
    row.snr_db = report.snr_db;
    row.lossless = report.lossless();
    std::cout << zdc::to_csv_row(row) << "\n";
    return 0;
}

int cmd_plot(const std::string& results, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string stem = std::filesystem::path(results).stem().string();
    const std::string out = (std::filesystem::path(out_dir) / (stem + "_snr.csv")).string();
    zdc::emit_plot_data(results, out);
    std::cout << "plot data written to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"zdc: zero-delay source coding laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    unsigned workers = 1;
    auto* train_cmd = app.add_subcommand("train", "train policies from an experiment config");
    train_cmd->add_option("--config", config_path, "experiment config JSON")->required();
    train_cmd->add_option("--workers", workers, "parallel cells");

    std::string policy_path, source_path;
    std::uint64_t samples = 1000000;
    std::uint64_t seed = 1;
    int expected_n = 0;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved policy");
    eval_cmd->add_option("--policy", policy_path, "policy JSON")->required();
    eval_cmd->add_option("--source", source_path, "source JSON")->required();
    eval_cmd->add_option("--samples", samples, "evaluation samples");
    eval_cmd->add_option("--seed", seed, "RNG seed");
    eval_cmd->add_option("--n", expected_n, "expected lattice parameter (guard)");

    auto* exp_cmd = app.add_subcommand("experiment", "run a full experiment config");
    exp_cmd->add_option("--config", config_path, "experiment config JSON")->required();
    exp_cmd->add_option("--workers", workers, "parallel cells");

    std::string results, out_dir = ".";
    auto* plot_cmd = app.add_subcommand("plot", "pivot results CSV into plot data");
    plot_cmd->add_option("--results", results, "results CSV")->required();
    plot_cmd->add_option("--out-dir", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(train_cmd)) return cmd_experiment(config_path, workers, true);
        if (app.got_subcommand(eval_cmd))
            return cmd_eval(policy_path, source_path, samples, seed, expected_n);
        if (app.got_subcommand(exp_cmd)) return cmd_experiment(config_path, workers, false);
        if (app.got_subcommand(plot_cmd)) return cmd_plot(results, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
