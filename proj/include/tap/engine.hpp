#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tap/denoiser.hpp"
#include "tap/difference_cache.hpp"
#include "tap/predictor_family.hpp"
#include "tap/token_selector.hpp"

namespace tap {

struct ExactStrategy {};
struct ReuseStrategy {};
struct GlobalStrategy {
    PredictorSpec spec;
};
struct ThresholdStrategy {
    double threshold = 1.0;
};
struct TapStrategy {};

using Strategy =
    std::variant<ExactStrategy, ReuseStrategy, GlobalStrategy, ThresholdStrategy, TapStrategy>;

std::string strategy_name(const Strategy& strategy);

struct EngineConfig {
    Schedule schedule;
    FamilyConfig family;
    ProxyMetric metric;
    Strategy strategy = TapStrategy{};
    std::uint64_t seed = 0;

    void validate() const {
        schedule.validate();
        family.validate();
        metric.validate();
    }

    bool is_tap() const { return std::holds_alternative<TapStrategy>(strategy); }
};

struct StepRecord {
    int step = 0;
    bool was_full = false;
    int k = 0;  // steps since the previous full computation
    FeatureTensor output;
    std::optional<SelectionMap> selection;       // present iff TAP skip step
    std::vector<double> candidate_mean_loss;     // per family index, NaN when inactive
};

struct RunTrace {
    std::vector<StepRecord> steps;
    std::vector<PredictorSpec> family;
    int full_count = 0;
    int skip_count = 0;
    long degenerate_token_count = 0;
    FeatureTensor final_state;
    std::uint64_t seed = 0;
    std::string strategy;
};

// Run one sampling trajectory: per step compute the probe, then either a
// full evaluation (schedule- or threshold-gated) that refreshes the caches,
// or a forecast according to the strategy. State advances x <- output.
RunTrace run(const Denoiser& denoiser, const FeatureTensor& x_init, const EngineConfig& cfg);

int full_call_count(const RunTrace& trace);

struct StrategyComparison {
    std::string name;
    double final_mse_vs_exact = 0.0;
    double mean_step_mse_vs_exact = 0.0;
    int full_count = 0;
};

// Run every config against a shared Exact reference (same denoiser and
// initial state) and report trajectory errors.
std::vector<StrategyComparison> compare_strategies(const Denoiser& denoiser,
                                                   const FeatureTensor& x_init,
                                                   const std::vector<EngineConfig>& cfgs);

}  // namespace tap
