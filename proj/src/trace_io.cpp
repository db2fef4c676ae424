#include "tap/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tap {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

double round_to_9_digits(double v) {
    if (!std::isfinite(v) || v == 0.0) return v;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::strtod(buf, nullptr);
}

const char* const kTraceCsvHeader =
    "step,was_full,k,error_vs_exact_mse,residual_error_mse,mean_chosen_proxy_loss,"
    "mean_order,var_order,mean_kp,var_kp,hermite_count,degenerate_tokens";

const char* const kSelectionCsvHeader =
    "step,token,batch,was_full,chosen_index,chosen_order,chosen_kp,proxy_loss,true_error";

std::string render_trace_csv(std::span<const StepCsvRow> rows) {
    std::string out = kTraceCsvHeader;
    out += '\n';
    for (const StepCsvRow& r : rows) {
        out += std::to_string(r.step);
        out += ',';
        out += r.was_full ? '1' : '0';
        out += ',';
        out += std::to_string(r.k);
        out += ',';
        out += format_double(r.error_vs_exact_mse);
        out += ',';
        out += format_double(r.residual_error_mse);
        out += ',';
        if (r.has_selection) {
            out += format_double(r.mean_chosen_proxy_loss);
            out += ',';
            out += format_double(r.mean_order);
            out += ',';
            out += format_double(r.var_order);
            out += ',';
            out += format_double(r.mean_kp);
            out += ',';
            out += format_double(r.var_kp);
            out += ',';
            out += std::to_string(r.hermite_count);
            out += ',';
            out += std::to_string(r.degenerate_tokens);
        } else {
            out += ",,,,,,";
        }
        out += '\n';
    }
    return out;
}

std::string render_selection_csv(std::span<const SelectionCsvRow> rows) {
    std::string out = kSelectionCsvHeader;
    out += '\n';
    for (const SelectionCsvRow& r : rows) {
        out += std::to_string(r.step);
        out += ',';
        out += std::to_string(r.token);
        out += ',';
        out += std::to_string(r.batch);
        out += ',';
        out += r.was_full ? '1' : '0';
        out += ',';
        out += std::to_string(r.chosen_index);
        out += ',';
        out += std::to_string(r.chosen_order);
        out += ',';
        out += std::to_string(r.chosen_kp);
        out += ',';
        out += format_double(r.proxy_loss);
        out += ',';
        out += format_double(r.true_error);
        out += '\n';
    }
    return out;
}

std::vector<SelectionCsvRow> parse_selection_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line)) throw IoError("selection csv: empty input");
    // Tolerate trailing carriage returns from round-tripped files.
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != kSelectionCsvHeader) {
        throw IoError("selection csv: unexpected header '" + line + "'");
    }
    std::vector<SelectionCsvRow> rows;
    int line_no = 1;
    while (std::getline(ss, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 9) {
            throw IoError("selection csv line " + std::to_string(line_no) +
                          ": expected 9 fields");
        }
        SelectionCsvRow r;
        try {
            r.step = std::stoi(fields[0]);
            r.token = std::stoi(fields[1]);
            r.batch = std::stoi(fields[2]);
            r.was_full = std::stoi(fields[3]) != 0;
            r.chosen_index = std::stoi(fields[4]);
            r.chosen_order = std::stoi(fields[5]);
            r.chosen_kp = std::stoi(fields[6]);
            r.proxy_loss = std::strtod(fields[7].c_str(), nullptr);
            r.true_error = std::strtod(fields[8].c_str(), nullptr);
        } catch (const std::exception&) {
            throw IoError("selection csv line " + std::to_string(line_no) + ": parse error");
        }
        rows.push_back(r);
    }
    return rows;
}

namespace {

void append_tensor_hex(std::string& out, const FeatureTensor& t) {
    char buf[48];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%a", t.data()[i]);
        out += buf;
        out += ' ';
    }
}

}  // namespace

std::string trace_to_string(const RunTrace& trace) {
    std::string out;
    out += "strategy=" + trace.strategy + " seed=" + std::to_string(trace.seed) +
           " full=" + std::to_string(trace.full_count) +
           " skip=" + std::to_string(trace.skip_count) + "\n";
    for (const StepRecord& record : trace.steps) {
        out += std::to_string(record.step);
        out += record.was_full ? " F " : " S ";
        out += "k=" + std::to_string(record.k) + " ";
        append_tensor_hex(out, record.output);
        out += '\n';
    }
    out += "final ";
    append_tensor_hex(out, trace.final_state);
    out += '\n';
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace tap
