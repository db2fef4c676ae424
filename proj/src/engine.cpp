#include "tap/engine.hpp"

#include <cmath>
#include <limits>

namespace tap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_abs(const FeatureTensor& t) {
    if (t.size() == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) acc += std::abs(t.data()[i]);
    return acc / static_cast<double>(t.size());
}

bool spec_active(const PredictorSpec& spec, const DifferenceStack& stack, int k) {
    if (static_cast<int>(stack.size()) < spec.min_snapshots()) return false;
    if (spec.is_taylor() && k - spec.taylor().horizon_offset < 0) return false;
    return true;
}

// Candidate probe forecasts scored against the actual probe, reduced to a
// per-candidate loss matrix. Inactive candidates carry a NaN matrix.
LossMatrix score_candidates(const std::vector<PredictorSpec>& family, const CacheState& cache,
                            const FeatureTensor& probe, int k, int normalization,
                            const ProxyMetric& metric) {
    LossMatrix losses;
    losses.batch = probe.batch();
    losses.tokens = probe.tokens();
    losses.active.assign(family.size(), false);
    losses.per_predictor.assign(family.size(),
                                TokenMatrix(losses.batch, losses.tokens, kNaN));
    for (std::size_t p = 0; p < family.size(); ++p) {
        if (!spec_active(family[p], cache.probe_stack, k)) continue;
        std::optional<FeatureTensor> forecast =
            predict(family[p], cache.probe_stack, k, normalization);
        if (!forecast) continue;
        losses.active[p] = true;
        losses.per_predictor[p] = proxy_loss(*forecast, probe, metric);
    }
    return losses;
}

std::vector<double> mean_losses(const LossMatrix& losses) {
    std::vector<double> means(losses.predictors(), kNaN);
    const std::size_t count = static_cast<std::size_t>(losses.batch) * losses.tokens;
    for (std::size_t p = 0; p < losses.predictors(); ++p) {
        if (!losses.active[p]) continue;
        double acc = 0.0;
        for (double v : losses.per_predictor[p].values) acc += v;
        means[p] = count > 0 ? acc / static_cast<double>(count) : 0.0;
    }
    return means;
}

}  // namespace

std::string strategy_name(const Strategy& strategy) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ExactStrategy>) return "exact";
            if constexpr (std::is_same_v<T, ReuseStrategy>) return "reuse";
            if constexpr (std::is_same_v<T, GlobalStrategy>) return "global[" + s.spec.label() + "]";
            if constexpr (std::is_same_v<T, ThresholdStrategy>)
                return "threshold[l=" + std::to_string(s.threshold) + "]";
            return "tap";
        },
        strategy);
}

RunTrace run(const Denoiser& denoiser, const FeatureTensor& x_init, const EngineConfig& cfg) {
    cfg.validate();
    if (!denoiser.full_eval || !denoiser.probe_eval) {
        throw ConfigMismatch("run: denoiser callbacks must be set");
    }

    const Schedule& sched = cfg.schedule;
    const std::vector<PredictorSpec> family = build_family(cfg.family);
    const bool is_tap = cfg.is_tap();
    const bool is_threshold = std::holds_alternative<ThresholdStrategy>(cfg.strategy);

    RunTrace trace;
    trace.family = family;
    trace.seed = cfg.seed;
    trace.strategy = strategy_name(cfg.strategy);
    trace.steps.reserve(static_cast<std::size_t>(sched.total_steps));

    CacheState cache(cfg.family.required_capacity(), sched.window);
    FeatureTensor x = x_init;
    FeatureTensor prev_probe;
    double threshold_accumulator = 0.0;

    for (int u = 0; u < sched.total_steps; ++u) {
        const FeatureTensor probe = denoiser.probe_eval(x, u);
        const int k = cache.steps_since_full(u);
        // The Taylor normalization factor equals the window in steady state
        // but must track the actual snapshot gap through warm-up, where
        // consecutive full steps sit one step apart.
        const int normalization = cache.residual_stack.newest_gap();

        bool cache_step = false;  // full evaluation that also refreshes the caches
        if (is_threshold) {
            if (u < sched.warmup) {
                cache_step = true;
            } else {
                const double denom = std::max(mean_abs(prev_probe), 1e-12);
                threshold_accumulator += mean_abs(probe - prev_probe) / denom;
                cache_step = threshold_accumulator >=
                             std::get<ThresholdStrategy>(cfg.strategy).threshold;
            }
        } else {
            cache_step = sched.is_full_step(u);
        }

        StepRecord record;
        record.step = u;
        record.k = k;

        if (cache_step) {
            record.was_full = true;
            FeatureTensor out = denoiser.full_eval(x, u);
            FeatureTensor residual = out - x;
            if (is_tap && !cache.probe_stack.empty() && k >= 1) {
                // Diagnostics only: candidate losses on full steps are
                // recorded in the trace but never acted on.
                LossMatrix losses = score_candidates(family, cache, probe, k, normalization,
                                                     cfg.metric);
                record.candidate_mean_loss = mean_losses(losses);
            }
            cache.probe_stack.push(u, probe);
            cache.residual_stack.push(u, std::move(residual));
            cache.last_full_step = u;
            threshold_accumulator = 0.0;
            record.output = std::move(out);
        } else {
            std::visit(
                [&](const auto& strat) {
                    using T = std::decay_t<decltype(strat)>;
                    if constexpr (std::is_same_v<T, ExactStrategy>) {
                        // Full evaluation every step; only schedule steps
                        // refresh the caches.
                        record.output = denoiser.full_eval(x, u);
                        record.was_full = true;
                    } else if constexpr (std::is_same_v<T, ReuseStrategy> ||
                                         std::is_same_v<T, ThresholdStrategy>) {
                        record.output = x + cache.residual_stack.differences(0)[0];
                    } else if constexpr (std::is_same_v<T, GlobalStrategy>) {
                        PredictorSpec spec = strat.spec;
                        if (spec.is_taylor()) {
                            // A singleton run must always produce an output:
                            // horizons behind the cache clamp to reuse.
                            TaylorSpec ts = spec.taylor();
                            ts.horizon_offset = std::min(ts.horizon_offset, k);
                            spec.kind = ts;
                        }
                        std::optional<FeatureTensor> forecast =
                            predict(spec, cache.residual_stack, k, normalization);
                        record.output = x + *forecast;
                    } else {  // TapStrategy
                        LossMatrix losses = score_candidates(family, cache, probe, k,
                                                             normalization, cfg.metric);
                        record.candidate_mean_loss = mean_losses(losses);
                        SelectionMap selection = select(losses);
                        trace.degenerate_token_count += selection.degenerate_count;
                        std::vector<FeatureTensor> residuals(family.size());
                        for (std::size_t p = 0; p < family.size(); ++p) {
                            if (!losses.active[p]) continue;
                            std::optional<FeatureTensor> forecast =
                                predict(family[p], cache.residual_stack, k, normalization);
                            residuals[p] = std::move(*forecast);
                        }
                        record.output = x + assemble_residual(selection, residuals);
                        record.selection = std::move(selection);
                    }
                },
                cfg.strategy);
        }

        if (record.was_full) {
            ++trace.full_count;
        } else {
            ++trace.skip_count;
        }
        x = record.output;
        prev_probe = probe;
        trace.steps.push_back(std::move(record));
    }

    trace.final_state = x;
    return trace;
}

int full_call_count(const RunTrace& trace) {
    return trace.full_count;
}

std::vector<StrategyComparison> compare_strategies(const Denoiser& denoiser,
                                                   const FeatureTensor& x_init,
                                                   const std::vector<EngineConfig>& cfgs) {
    if (cfgs.empty()) return {};
    const int total_steps = cfgs.front().schedule.total_steps;
    for (const EngineConfig& cfg : cfgs) {
        if (cfg.schedule.total_steps != total_steps) {
            throw ConfigMismatch("compare_strategies: configs must share total_steps");
        }
    }

    EngineConfig exact_cfg = cfgs.front();
    exact_cfg.strategy = ExactStrategy{};
    const RunTrace exact = run(denoiser, x_init, exact_cfg);

    std::vector<StrategyComparison> rows;
    rows.reserve(cfgs.size());
    for (const EngineConfig& cfg : cfgs) {
        const RunTrace trace = run(denoiser, x_init, cfg);
        StrategyComparison row;
        row.name = strategy_name(cfg.strategy);
        row.full_count = trace.full_count;
        row.final_mse_vs_exact = mean_squared_error(trace.final_state, exact.final_state);
        double acc = 0.0;
        for (std::size_t i = 0; i < trace.steps.size(); ++i) {
            acc += mean_squared_error(trace.steps[i].output, exact.steps[i].output);
        }
        row.mean_step_mse_vs_exact =
            trace.steps.empty() ? 0.0 : acc / static_cast<double>(trace.steps.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace tap
