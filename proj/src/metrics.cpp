#include "tap/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace tap {

double psnr(const FeatureTensor& reference, const FeatureTensor& test,
            std::optional<double> peak) {
    reference.require_same_shape(test);
    const double mse = mean_squared_error(reference, test);
    if (mse == 0.0) return 300.0;
    double p = 0.0;
    if (peak.has_value()) {
        if (!(*peak > 0.0)) throw ZeroPeak("psnr: peak must be > 0");
        p = *peak;
    } else {
        p = max_abs(reference);
        if (p == 0.0) throw ZeroPeak("psnr: auto peak is zero with nonzero error");
    }
    const double value = 10.0 * std::log10(p * p / mse);
    return value > 300.0 ? 300.0 : value;
}

std::vector<StepSelectionStats> selection_stats(const RunTrace& trace,
                                                const std::vector<PredictorSpec>& family) {
    if (trace.strategy != "tap") {
        throw NotATapTrace("selection_stats: trace was produced by strategy '" +
                           trace.strategy + "'");
    }
    std::vector<StepSelectionStats> rows;
    for (const StepRecord& record : trace.steps) {
        if (record.was_full || !record.selection.has_value()) continue;
        const SelectionMap& sel = *record.selection;
        StepSelectionStats row;
        row.step = record.step;
        double sum_order = 0.0, sum_order_sq = 0.0;
        double sum_kp = 0.0, sum_kp_sq = 0.0;
        for (int idx : sel.chosen) {
            if (idx < 0 || idx >= static_cast<int>(family.size())) {
                throw IndexOutOfRange("selection_stats: chosen index outside family");
            }
            const PredictorSpec& spec = family[idx];
            if (spec.is_hermite()) {
                ++row.hermite_count;
                continue;
            }
            const double order = spec.taylor().order;
            const double kp = record.k - spec.taylor().horizon_offset;
            sum_order += order;
            sum_order_sq += order * order;
            sum_kp += kp;
            sum_kp_sq += kp * kp;
            ++row.selected_tokens;
        }
        if (row.selected_tokens > 0) {
            const double n = static_cast<double>(row.selected_tokens);
            row.mean_order = sum_order / n;
            row.var_order = std::max(0.0, sum_order_sq / n - row.mean_order * row.mean_order);
            row.mean_kp = sum_kp / n;
            row.var_kp = std::max(0.0, sum_kp_sq / n - row.mean_kp * row.mean_kp);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace tap
