#pragma once

#include <span>
#include <string>
#include <vector>

#include "tap/engine.hpp"

namespace tap {

// Fixed 9-significant-digit rendering used by every CSV/JSON output so
// repeated invocations are byte-identical. Non-finite values render as
// "nan"/"inf"/"-inf".
std::string format_double(double v);

// Round to 9 significant digits (the precision carried by the JSON summary).
double round_to_9_digits(double v);

// Per-step trace CSV: exactly total_steps rows.
struct StepCsvRow {
    int step = 0;
    bool was_full = false;
    int k = 0;
    double error_vs_exact_mse = 0.0;
    double residual_error_mse = 0.0;
    double mean_chosen_proxy_loss = 0.0;
    double mean_order = 0.0;
    double var_order = 0.0;
    double mean_kp = 0.0;
    double var_kp = 0.0;
    long hermite_count = 0;
    long degenerate_tokens = 0;
    bool has_selection = false;
};

// Per-token selection CSV: one row per (skip step, batch, token) on TAP
// runs. Hermite selections carry chosen_order = chosen_kp = -1.
struct SelectionCsvRow {
    int step = 0;
    int token = 0;
    int batch = 0;
    bool was_full = false;
    int chosen_index = 0;
    int chosen_order = 0;
    int chosen_kp = 0;
    double proxy_loss = 0.0;
    double true_error = 0.0;
};

extern const char* const kTraceCsvHeader;
extern const char* const kSelectionCsvHeader;

std::string render_trace_csv(std::span<const StepCsvRow> rows);
std::string render_selection_csv(std::span<const SelectionCsvRow> rows);

std::vector<SelectionCsvRow> parse_selection_csv(const std::string& text);

// Canonical serialization of a run's decisions and outputs (hex floats, so
// equality is exact). Strategy-specific annotations such as selection maps
// are not included; two runs serializing identically produced bitwise-equal
// trajectories.
std::string trace_to_string(const RunTrace& trace);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace tap
