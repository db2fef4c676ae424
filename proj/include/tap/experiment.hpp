#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tap/config.hpp"
#include "tap/metrics.hpp"
#include "tap/trace_io.hpp"

namespace tap {

struct ExperimentResult {
    MetricsReport report;
    RunTrace trace;
    std::vector<StepCsvRow> step_rows;
    std::vector<SelectionCsvRow> selection_rows;  // TAP runs only
};

// Build the scenario denoiser, run the configured strategy alongside a
// same-seed Exact reference and compute all metrics.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Stable-key-order JSON with 9-significant-digit values.
std::string summary_json(const ExperimentConfig& cfg, const MetricsReport& report);

// Writes summary.json, trace.csv and (for TAP) selection.csv into
// cfg.out_dir, creating it if needed.
void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& result);

struct SweepRow {
    std::string axis_value;
    MetricsReport report;
};

// One run per axis value under a shared seed. Member runs may execute in
// parallel (capped by TAP_THREADS); rows are ordered by axis value.
std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::string& axis,
                            const std::vector<std::string>& values);

std::string render_sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows);

// Run several strategies on the shared scenario for side-by-side reporting.
std::vector<std::pair<std::string, MetricsReport>> compare_runs(
    const ExperimentConfig& base, const std::vector<std::string>& strategies);

std::string render_compare_csv(
    const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace tap
