#include "tap/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include <json.hpp>

#include "tap/scenarios.hpp"

namespace tap {

namespace {

double mean_abs_channel(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return a.empty() ? 0.0 : acc / static_cast<double>(a.size());
}

int thread_budget(std::size_t jobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    int budget = static_cast<int>(std::min<std::size_t>(hw, jobs));
    if (const char* env = std::getenv("TAP_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) budget = std::min(budget, cap);
    }
    return std::max(budget, 1);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!cfg.seed.has_value()) {
        throw ConfigError("config key 'seed': required (set in file or pass --seed)");
    }
    const std::uint64_t seed = *cfg.seed;

    const TrajectorySpec trajectory = cfg.build_trajectory(seed);
    const FeatureTensor x_init = make_initial_state(cfg.dims(), seed);
    const Denoiser denoiser =
        make_denoiser(trajectory, ModulationSchedule::identity(), cfg.probe_mode);

    EngineConfig engine_cfg = cfg.engine_config();
    ExperimentResult result;
    result.trace = run(denoiser, x_init, engine_cfg);

    EngineConfig exact_cfg = engine_cfg;
    exact_cfg.strategy = ExactStrategy{};
    const RunTrace exact =
        cfg.strategy == "exact" ? result.trace : run(denoiser, x_init, exact_cfg);

    MetricsReport& report = result.report;
    report.full_count = result.trace.full_count;
    report.skip_count = result.trace.skip_count;
    report.degenerate_token_count = result.trace.degenerate_token_count;
    report.final_state_mse = mean_squared_error(result.trace.final_state, exact.final_state);
    report.final_state_psnr_db = psnr(exact.final_state, result.trace.final_state);
    report.speedup_estimate =
        static_cast<double>(cfg.total_steps) /
        (report.full_count + cfg.probe_fraction * report.skip_count);
    if (cfg.strategy == "tap") {
        report.selection = selection_stats(result.trace, result.trace.family);
    }

    // Per-step rows. The residual applied at step u is output_u - x_u where
    // x_u is the previous step's output.
    const FeatureTensor* x_prev = &x_init;
    double residual_acc = 0.0;
    int residual_steps = 0;
    std::size_t stats_cursor = 0;
    for (std::size_t i = 0; i < result.trace.steps.size(); ++i) {
        const StepRecord& record = result.trace.steps[i];
        const FeatureTensor r_true = residual_truth(trajectory, record.step);
        const FeatureTensor applied = record.output - *x_prev;

        StepCsvRow row;
        row.step = record.step;
        row.was_full = record.was_full;
        row.k = record.k;
        row.error_vs_exact_mse = mean_squared_error(record.output, exact.steps[i].output);
        row.residual_error_mse = mean_squared_error(applied, r_true);
        if (!record.was_full) {
            residual_acc += row.residual_error_mse;
            ++residual_steps;
        }

        if (record.selection.has_value()) {
            const SelectionMap& sel = *record.selection;
            row.has_selection = true;
            double loss_acc = 0.0;
            for (double v : sel.chosen_loss) loss_acc += v;
            row.mean_chosen_proxy_loss =
                sel.chosen_loss.empty()
                    ? 0.0
                    : loss_acc / static_cast<double>(sel.chosen_loss.size());
            if (stats_cursor < report.selection.size() &&
                report.selection[stats_cursor].step == record.step) {
                const StepSelectionStats& st = report.selection[stats_cursor];
                row.mean_order = st.mean_order;
                row.var_order = st.var_order;
                row.mean_kp = st.mean_kp;
                row.var_kp = st.var_kp;
                row.hermite_count = st.hermite_count;
                ++stats_cursor;
            }
            row.degenerate_tokens = sel.degenerate_count;

            for (int b = 0; b < cfg.batch; ++b) {
                for (int n = 0; n < cfg.tokens; ++n) {
                    SelectionCsvRow srow;
                    srow.step = record.step;
                    srow.token = n;
                    srow.batch = b;
                    srow.was_full = false;
                    srow.chosen_index = sel.chosen_at(b, n);
                    const PredictorSpec& spec = result.trace.family[srow.chosen_index];
                    if (spec.is_taylor()) {
                        srow.chosen_order = spec.taylor().order;
                        srow.chosen_kp = record.k - spec.taylor().horizon_offset;
                    } else {
                        srow.chosen_order = -1;
                        srow.chosen_kp = -1;
                    }
                    srow.proxy_loss = sel.loss_at(b, n);
                    srow.true_error = mean_abs_channel(applied.token(b, n), r_true.token(b, n));
                    result.selection_rows.push_back(srow);
                }
            }
        }

        result.step_rows.push_back(row);
        x_prev = &record.output;
    }
    report.mean_step_residual_error =
        residual_steps > 0 ? residual_acc / static_cast<double>(residual_steps) : 0.0;
    report.total_residual_mse = residual_acc;

    return result;
}

std::string summary_json(const ExperimentConfig& cfg, const MetricsReport& report) {
    nlohmann::ordered_json j;
    j["strategy"] = cfg.strategy;
    j["scenario"] = cfg.scenario;
    j["probe_mode"] = to_string(cfg.probe_mode);
    j["metric"] = to_string(cfg.metric.kind);
    j["seed"] = cfg.seed.value_or(0);
    j["batch"] = cfg.batch;
    j["tokens"] = cfg.tokens;
    j["channels"] = cfg.channels;
    j["steps"] = cfg.total_steps;
    j["window"] = cfg.window;
    j["warmup"] = cfg.warmup;
    j["family_size"] = build_family(cfg.family).size();
    j["full_count"] = report.full_count;
    j["skip_count"] = report.skip_count;
    j["degenerate_token_count"] = report.degenerate_token_count;
    j["speedup_estimate"] = round_to_9_digits(report.speedup_estimate);
    j["final_state_mse"] = round_to_9_digits(report.final_state_mse);
    j["final_state_psnr_db"] = round_to_9_digits(report.final_state_psnr_db);
    j["mean_step_residual_error"] = round_to_9_digits(report.mean_step_residual_error);
    j["total_residual_mse"] = round_to_9_digits(report.total_residual_mse);
    nlohmann::ordered_json stats = nlohmann::ordered_json::array();
    for (const StepSelectionStats& st : report.selection) {
        nlohmann::ordered_json row;
        row["step"] = st.step;
        row["selected_tokens"] = st.selected_tokens;
        row["mean_order"] = round_to_9_digits(st.mean_order);
        row["var_order"] = round_to_9_digits(st.var_order);
        row["mean_kp"] = round_to_9_digits(st.mean_kp);
        row["var_kp"] = round_to_9_digits(st.var_kp);
        row["hermite_count"] = st.hermite_count;
        stats.push_back(row);
    }
    j["selection_stats"] = stats;
    return j.dump(2) + "\n";
}

void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& result) {
    if (cfg.out_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);
    const std::filesystem::path dir(cfg.out_dir);
    write_file((dir / "summary.json").string(), summary_json(cfg, result.report));
    write_file((dir / "trace.csv").string(), render_trace_csv(result.step_rows));
    if (cfg.strategy == "tap") {
        write_file((dir / "selection.csv").string(),
                   render_selection_csv(result.selection_rows));
    }
}

namespace {

ExperimentConfig apply_axis(const ExperimentConfig& base, const std::string& axis,
                            const std::string& value) {
    ExperimentConfig cfg = base;
    cfg.out_dir.clear();
    const auto as_int = [&](const std::string& v) {
        try {
            return std::stoi(v);
        } catch (const std::exception&) {
            throw ConfigError("sweep value '" + v + "': expected integer for axis " + axis);
        }
    };
    if (axis == "N" || axis == "window") {
        cfg.window = as_int(value);
    } else if (axis == "lambda") {
        cfg.family.lambda = as_int(value);
    } else if (axis == "delta") {
        cfg.family.delta = as_int(value);
    } else if (axis == "order_high" || axis == "O_r") {
        cfg.family.order_high = as_int(value);
    } else if (axis == "metric") {
        cfg.metric.kind = distance_kind_from_string(value);
    } else if (axis == "probe_mode") {
        cfg.probe_mode = probe_mode_from_string(value);
    } else if (axis == "strategy") {
        cfg.strategy = value;
    } else {
        throw UnknownAxis("unknown sweep axis: " + axis);
    }
    cfg.validate();
    return cfg;
}

}  // namespace

std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::string& axis,
                            const std::vector<std::string>& values) {
    if (values.empty()) throw ConfigError("sweep: no values given");
    std::vector<ExperimentConfig> cfgs;
    cfgs.reserve(values.size());
    for (const std::string& v : values) cfgs.push_back(apply_axis(base, axis, v));

    std::vector<SweepRow> rows(values.size());
    std::vector<std::exception_ptr> failures(values.size());
    const int threads = thread_budget(values.size());

    const auto worker = [&](int offset) {
        for (std::size_t i = static_cast<std::size_t>(offset); i < values.size();
             i += static_cast<std::size_t>(threads)) {
            try {
                rows[i].axis_value = values[i];
                rows[i].report = run_experiment(cfgs[i]).report;
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& err : failures) {
        if (err) std::rethrow_exception(err);
    }
    return rows;
}

std::string render_sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows) {
    std::string out = axis +
                      ",final_state_mse,final_state_psnr_db,total_residual_mse,"
                      "full_count,speedup\n";
    for (const SweepRow& row : rows) {
        out += row.axis_value;
        out += ',';
        out += format_double(row.report.final_state_mse);
        out += ',';
        out += format_double(row.report.final_state_psnr_db);
        out += ',';
        out += format_double(row.report.total_residual_mse);
        out += ',';
        out += std::to_string(row.report.full_count);
        out += ',';
        out += format_double(row.report.speedup_estimate);
        out += '\n';
    }
    return out;
}

std::vector<std::pair<std::string, MetricsReport>> compare_runs(
    const ExperimentConfig& base, const std::vector<std::string>& strategies) {
    if (strategies.empty()) throw ConfigError("compare: no strategies given");
    std::vector<std::pair<std::string, MetricsReport>> rows;
    rows.reserve(strategies.size());
    for (const std::string& name : strategies) {
        ExperimentConfig cfg = base;
        cfg.out_dir.clear();
        cfg.strategy = name;
        cfg.validate();
        rows.emplace_back(name, run_experiment(cfg).report);
    }
    return rows;
}

std::string render_compare_csv(
    const std::vector<std::pair<std::string, MetricsReport>>& rows) {
    std::string out =
        "strategy,final_state_mse,final_state_psnr_db,mean_step_residual_error,"
        "total_residual_mse,full_count,speedup\n";
    for (const auto& [name, report] : rows) {
        out += name;
        out += ',';
        out += format_double(report.final_state_mse);
        out += ',';
        out += format_double(report.final_state_psnr_db);
        out += ',';
        out += format_double(report.mean_step_residual_error);
        out += ',';
        out += format_double(report.total_residual_mse);
        out += ',';
        out += std::to_string(report.full_count);
        out += ',';
        out += format_double(report.speedup_estimate);
        out += '\n';
    }
    return out;
}

}  // namespace tap
