#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tap/difference_cache.hpp"
#include "tap/tensor.hpp"

namespace tap {

// Taylor forecast of expansion order `order`, evaluated at prediction
// distance k_p = k - horizon_offset where k is the elapsed distance from the
// last full step.
struct TaylorSpec {
    int order = 0;
    int horizon_offset = 0;
};

// Least-squares fit on probabilists' Hermite polynomials over the `window`
// most recent snapshots.
struct HermiteSpec {
    int order = 2;
    int window = 3;
};

struct PredictorSpec {
    std::variant<TaylorSpec, HermiteSpec> kind;

    bool is_taylor() const { return std::holds_alternative<TaylorSpec>(kind); }
    bool is_hermite() const { return std::holds_alternative<HermiteSpec>(kind); }
    const TaylorSpec& taylor() const { return std::get<TaylorSpec>(kind); }
    const HermiteSpec& hermite() const { return std::get<HermiteSpec>(kind); }

    // Snapshots required before the spec can produce a forecast.
    int min_snapshots() const {
        if (is_taylor()) return taylor().order + 1;
        return hermite().window;
    }

    std::string label() const;
};

struct FamilyConfig {
    int order_low = 0;
    int order_high = 2;
    int lambda = 4;
    int delta = 1;
    bool include_hermite = false;
    int hermite_order = 2;
    int hermite_window = 3;

    void validate() const;

    // Snapshot capacity needed so every family member can evaluate.
    int required_capacity() const;
};

// Candidate set: Taylor{m, o} for every order m in [order_low, order_high]
// and every offset o in {0, delta, 2*delta, ...}, floor((lambda+1)/delta)
// offsets in total, ordered ascending offset then ascending order. Hermite
// specs are appended last when enabled.
std::vector<PredictorSpec> build_family(const FamilyConfig& cfg);

// Sum over i of D_i * (-k_p)^i / (i! * normalization^i), elementwise.
// k_p = 0 returns the newest snapshot (plain reuse).
FeatureTensor taylor_predict(const DifferenceStack& stack, int order, int k_p,
                             int normalization);

// Probabilists' Hermite polynomials He_0..He_order at t.
std::vector<double> hermite_basis(int order, double t);

struct HermiteFit {
    std::vector<FeatureTensor> coeff;  // order+1 tensors
    int oldest_step = 0;
    int newest_step = 0;

    // Affine map sending oldest_step -> -1 and newest_step -> +1.
    double normalized_time(double step) const {
        return -1.0 + 2.0 * (step - oldest_step) / (newest_step - oldest_step);
    }
};

// Ordinary least squares of sum_k c_k * He_k(t_j) over the `window` most
// recent snapshots, with step indices mapped affinely so the oldest used
// snapshot lands at t = -1 and the newest at t = +1. With window == order+1
// the fit interpolates exactly.
HermiteFit hermite_fit(std::span<const Snapshot> snapshots, int order, int window);

FeatureTensor hermite_predict(const std::vector<FeatureTensor>& coeff,
                              double target_normalized_time);

// Evaluate one candidate on a stack at elapsed distance k. Taylor specs with
// k_p = k - offset < 0 are inactive and return nullopt rather than clamping.
std::optional<FeatureTensor> predict(const PredictorSpec& spec, const DifferenceStack& stack,
                                     int k, int normalization);

}  // namespace tap
