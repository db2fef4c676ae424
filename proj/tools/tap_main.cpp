#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tap/cost_model.hpp"
#include "tap/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

struct CommonOptions {
    std::string config_path;
    std::optional<std::int64_t> seed;
    std::string out_dir;
    std::vector<std::string> overrides;  // key=value pairs from --set
};

tap::ExperimentConfig load_config(const CommonOptions& opts) {
    std::map<std::string, std::string> kv;
    if (!opts.config_path.empty()) {
        try {
            kv = tap::load_key_value_file(opts.config_path);
        } catch (const tap::IoError& e) {
            throw tap::ConfigError(e.what());
        }
    }
    for (const std::string& item : opts.overrides) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos) {
            throw tap::ConfigError("--set expects key=value, got '" + item + "'");
        }
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    if (opts.seed.has_value()) kv["seed"] = std::to_string(*opts.seed);
    if (!opts.out_dir.empty()) kv["out_dir"] = opts.out_dir;
    return tap::ExperimentConfig::from_key_values(kv);
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required) {
    auto* c = cmd->add_option("-c,--config", opts.config_path, "configuration file");
    if (config_required) c->required();
    cmd->add_option("--seed", opts.seed, "run seed (overrides config)");
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--set", opts.overrides, "override any config key (key=value)");
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    for (char c : csv) {
        if (c == ',') {
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else {
            item += c;
        }
    }
    if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Token-adaptive feature forecasting benchmark"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    auto* run_cmd = app.add_subcommand("run", "run one experiment");
    add_common(run_cmd, run_opts, true);

    CommonOptions sweep_opts;
    std::string sweep_axis;
    std::string sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep one parameter axis");
    add_common(sweep_cmd, sweep_opts, true);
    sweep_cmd->add_option("--axis", sweep_axis, "axis: N|lambda|delta|order_high|metric|probe_mode|strategy")
        ->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated axis values")->required();

    CommonOptions compare_opts;
    std::string compare_strategies;
    auto* compare_cmd = app.add_subcommand("compare", "compare strategies on one scenario");
    add_common(compare_cmd, compare_opts, true);
    compare_cmd
        ->add_option("--strategies", compare_strategies,
                     "comma-separated strategies (exact,reuse,global,threshold,tap)")
        ->required();

    auto* cost_cmd = app.add_subcommand("cost", "analytic schedule/FLOPs accounting");
    int cost_T = 50, cost_N = 5, cost_W = 3;
    double cost_probe_fraction = 0.0;
    std::int64_t cost_layers = 0, cost_tokens = 0, cost_channels = 0;
    cost_cmd->add_option("--T", cost_T, "total sampling steps")->required();
    cost_cmd->add_option("--N", cost_N, "cache window")->required();
    cost_cmd->add_option("--W", cost_W, "warm-up steps")->required();
    cost_cmd->add_option("--probe-fraction", cost_probe_fraction,
                         "probe cost as a fraction of a full step");
    cost_cmd->add_option("--layers", cost_layers, "transformer layers (enables FLOPs output)");
    cost_cmd->add_option("--tokens", cost_tokens, "sequence length");
    cost_cmd->add_option("--channels", cost_channels, "hidden dimension");

    auto* stats_cmd = app.add_subcommand("stats", "selection statistics from a selection CSV");
    std::string stats_trace;
    stats_cmd->add_option("--trace", stats_trace, "per-token selection CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (run_cmd->parsed()) {
            const tap::ExperimentConfig cfg = load_config(run_opts);
            if (!cfg.seed.has_value()) {
                throw tap::ConfigError("config key 'seed': required for run");
            }
            const tap::ExperimentResult result = tap::run_experiment(cfg);
            tap::write_experiment_outputs(cfg, result);
            std::cout << tap::summary_json(cfg, result.report);
        } else if (sweep_cmd->parsed()) {
            const tap::ExperimentConfig cfg = load_config(sweep_opts);
            const std::vector<tap::SweepRow> rows =
                tap::sweep(cfg, sweep_axis, split_list(sweep_values));
            const std::string csv = tap::render_sweep_csv(sweep_axis, rows);
            if (!cfg.out_dir.empty()) {
                std::filesystem::create_directories(cfg.out_dir);
                tap::write_file((std::filesystem::path(cfg.out_dir) / "sweep.csv").string(),
                                csv);
            }
            std::cout << csv;
        } else if (compare_cmd->parsed()) {
            const tap::ExperimentConfig cfg = load_config(compare_opts);
            const auto rows = tap::compare_runs(cfg, split_list(compare_strategies));
            const std::string csv = tap::render_compare_csv(rows);
            if (!cfg.out_dir.empty()) {
                std::filesystem::create_directories(cfg.out_dir);
                tap::write_file((std::filesystem::path(cfg.out_dir) / "compare.csv").string(),
                                csv);
            }
            std::cout << csv;
        } else if (cost_cmd->parsed()) {
            nlohmann::ordered_json j;
            j["T"] = cost_T;
            j["N"] = cost_N;
            j["W"] = cost_W;
            j["probe_fraction"] = tap::round_to_9_digits(cost_probe_fraction);
            const tap::Schedule sched{cost_T, cost_N, cost_W};
            j["full_count"] = sched.full_count();
            j["skip_count"] = cost_T - sched.full_count();
            j["speedup"] = tap::round_to_9_digits(
                tap::schedule_speedup(cost_T, cost_N, cost_W, cost_probe_fraction));
            if (cost_layers > 0 && cost_tokens > 0 && cost_channels > 0) {
                tap::TransformerDims dims;
                dims.layers = cost_layers;
                dims.tokens = cost_tokens;
                dims.channels = cost_channels;
                j["flops_full"] = tap::round_to_9_digits(tap::flops_full(dims));
                j["flops_probe"] = tap::round_to_9_digits(tap::flops_probe(dims));
                j["probe_full_ratio"] =
                    tap::round_to_9_digits(tap::flops_probe(dims) / tap::flops_full(dims));
            }
            std::cout << j.dump(2) << "\n";
        } else if (stats_cmd->parsed()) {
            const std::vector<tap::SelectionCsvRow> rows =
                tap::parse_selection_csv(tap::read_file(stats_trace));
            // Aggregate per step; Hermite rows (order -1) counted separately.
            std::map<int, std::array<double, 5>> acc;  // n, sum_o, sum_o2, sum_kp, sum_kp2
            std::map<int, long> hermite;
            for (const tap::SelectionCsvRow& row : rows) {
                if (row.chosen_order < 0) {
                    hermite[row.step]++;
                    acc.try_emplace(row.step, std::array<double, 5>{});
                    continue;
                }
                auto& a = acc.try_emplace(row.step, std::array<double, 5>{}).first->second;
                a[0] += 1.0;
                a[1] += row.chosen_order;
                a[2] += static_cast<double>(row.chosen_order) * row.chosen_order;
                a[3] += row.chosen_kp;
                a[4] += static_cast<double>(row.chosen_kp) * row.chosen_kp;
            }
            std::string csv =
                "step,selected_tokens,mean_order,var_order,mean_kp,var_kp,hermite_count\n";
            for (const auto& [step, a] : acc) {
                const double n = a[0];
                const double mean_o = n > 0 ? a[1] / n : 0.0;
                const double var_o = n > 0 ? std::max(0.0, a[2] / n - mean_o * mean_o) : 0.0;
                const double mean_kp = n > 0 ? a[3] / n : 0.0;
                const double var_kp = n > 0 ? std::max(0.0, a[4] / n - mean_kp * mean_kp) : 0.0;
                csv += std::to_string(step) + ',' + std::to_string(static_cast<long>(n)) + ',' +
                       tap::format_double(mean_o) + ',' + tap::format_double(var_o) + ',' +
                       tap::format_double(mean_kp) + ',' + tap::format_double(var_kp) + ',' +
                       std::to_string(hermite.count(step) ? hermite[step] : 0) + '\n';
            }
            std::cout << csv;
        }
    } catch (const tap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const tap::UnknownAxis& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return kExitOk;
}
