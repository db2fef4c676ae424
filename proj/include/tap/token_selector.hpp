#pragma once

#include <span>
#include <string>
#include <vector>

#include "tap/tensor.hpp"

namespace tap {

enum class DistanceKind { Cosine, L1, Mse };

std::string to_string(DistanceKind kind);
DistanceKind distance_kind_from_string(const std::string& name);

struct ProxyMetric {
    DistanceKind kind = DistanceKind::Cosine;
    double epsilon = 1e-8;  // zero-norm guard for the cosine metric

    void validate() const {
        if (!(epsilon > 0.0) || epsilon > 1e-3) {
            throw InvalidConfig("metric epsilon must lie in (0, 1e-3]");
        }
    }
};

// 1 - <a,b> / (max(|a|, eps) * max(|b|, eps)). Both norms below eps yields 0
// (treated as identical); exactly one degenerate norm yields 2 (maximally
// different).
double cosine_distance(std::span<const double> a, std::span<const double> b, double eps);

// Per-(batch, token) scalar field.
struct TokenMatrix {
    int batch = 0;
    int tokens = 0;
    std::vector<double> values;

    TokenMatrix() = default;
    TokenMatrix(int b, int n, double fill = 0.0)
        : batch(b), tokens(n), values(static_cast<std::size_t>(b) * n, fill) {}

    double& at(int b, int n) { return values[static_cast<std::size_t>(b) * tokens + n]; }
    double at(int b, int n) const { return values[static_cast<std::size_t>(b) * tokens + n]; }
};

// Per-token distance between a predicted probe and the actual probe, reduced
// over the channel axis (mean reduction for L1/MSE so channel count does not
// rescale the metric).
TokenMatrix proxy_loss(const FeatureTensor& predicted, const FeatureTensor& actual,
                       const ProxyMetric& metric);

struct LossMatrix {
    int batch = 0;
    int tokens = 0;
    std::vector<TokenMatrix> per_predictor;  // one entry per candidate index
    std::vector<bool> active;                // candidate index -> participates

    std::size_t predictors() const { return per_predictor.size(); }
};

struct SelectionMap {
    int batch = 0;
    int tokens = 0;
    std::vector<int> chosen;         // predictor index per (batch, token)
    std::vector<double> chosen_loss; // loss at the chosen index
    long degenerate_count = 0;       // tokens whose losses were all non-finite

    int chosen_at(int b, int n) const {
        return chosen[static_cast<std::size_t>(b) * tokens + n];
    }
    double loss_at(int b, int n) const {
        return chosen_loss[static_cast<std::size_t>(b) * tokens + n];
    }
};

// Per-token argmin over active predictors. Ties break to the lowest
// predictor index; non-finite losses are treated as +inf; tokens where every
// active loss is non-finite select the lowest active index and are counted
// in degenerate_count.
SelectionMap select(const LossMatrix& losses);

// Gather: output token (b, n) is candidates[chosen(b, n)] at (b, n).
// Candidates never selected may be empty tensors.
FeatureTensor assemble_residual(const SelectionMap& selection,
                                const std::vector<FeatureTensor>& candidates);

}  // namespace tap
