#pragma once

#include <optional>
#include <vector>

#include "tap/engine.hpp"
#include "tap/tensor.hpp"

namespace tap {

// 10*log10(peak^2 / MSE) in dB, capped at 300 dB when MSE is zero. With no
// explicit peak, uses max|reference|; a zero auto-peak with nonzero error is
// a ZeroPeak error.
double psnr(const FeatureTensor& reference, const FeatureTensor& test,
            std::optional<double> peak = std::nullopt);

struct StepSelectionStats {
    int step = 0;
    long selected_tokens = 0;  // tokens counted into the Taylor statistics
    double mean_order = 0.0;
    double var_order = 0.0;
    double mean_kp = 0.0;
    double var_kp = 0.0;
    long hermite_count = 0;  // Hermite selections tabulated separately
};

// Per-skip-step mean/variance of the chosen Taylor order and prediction
// distance. Only defined for TAP traces.
std::vector<StepSelectionStats> selection_stats(const RunTrace& trace,
                                                const std::vector<PredictorSpec>& family);

struct MetricsReport {
    double final_state_mse = 0.0;
    double final_state_psnr_db = 0.0;
    double mean_step_residual_error = 0.0;  // mean over skip steps of residual MSE
    double total_residual_mse = 0.0;        // sum over skip steps of residual MSE
    int full_count = 0;
    int skip_count = 0;
    long degenerate_token_count = 0;
    double speedup_estimate = 0.0;
    std::vector<StepSelectionStats> selection;  // TAP runs only
};

}  // namespace tap
