#pragma once

#include "tap/difference_cache.hpp"
#include "tap/errors.hpp"

namespace tap {

struct TransformerDims {
    long long layers = 1;            // L
    long long tokens = 1;            // Nx
    long long channels = 1;          // D
    double params = 0.0;             // P
    int bytes_per_element = 2;       // b
    int cached_tensors = 2;          // |C|
    double activation_factor = 0.0;  // alpha
    long long batch = 1;             // B

    void validate() const {
        if (layers < 0 || tokens < 1 || channels < 1 || batch < 1) {
            throw InvalidConfig("transformer dims must be positive (layers >= 0)");
        }
        if (params < 0.0 || cached_tensors < 0 || activation_factor < 0.0) {
            throw InvalidConfig("params/cached_tensors/activation_factor must be >= 0");
        }
        const int b = bytes_per_element;
        if (b != 1 && b != 2 && b != 4 && b != 8) {
            throw InvalidConfig("bytes_per_element must be one of 1, 2, 4, 8");
        }
    }
};

// L * (24 * Nx * D^2 + 4 * Nx^2 * D): linear projections plus FFN matmuls,
// and attention matmuls.
inline double flops_full(const TransformerDims& d) {
    d.validate();
    const double nx = static_cast<double>(d.tokens);
    const double dd = static_cast<double>(d.channels);
    return static_cast<double>(d.layers) * (24.0 * nx * dd * dd + 4.0 * nx * nx * dd);
}

// One layer's projection/modulation cost with the attention term dropped:
// 24 * Nx * D^2.
inline double flops_probe(const TransformerDims& d) {
    d.validate();
    const double nx = static_cast<double>(d.tokens);
    const double dd = static_cast<double>(d.channels);
    return 24.0 * nx * dd * dd;
}

// P*b + (|C| + alpha) * B * Nx * D * b bytes.
inline double hbm_peak(const TransformerDims& d) {
    d.validate();
    return d.params * d.bytes_per_element +
           (d.cached_tensors + d.activation_factor) * static_cast<double>(d.batch) *
               static_cast<double>(d.tokens) * static_cast<double>(d.channels) *
               d.bytes_per_element;
}

// T / (full_count + probe_fraction * skip_count) with full_count from the
// warm-up-anchored window schedule.
inline double schedule_speedup(int total_steps, int window, int warmup, double probe_fraction) {
    if (!(probe_fraction >= 0.0) || probe_fraction > 1.0) {
        throw InvalidSchedule("probe_fraction must lie in [0, 1]");
    }
    Schedule sched{total_steps, window, warmup};
    sched.validate();
    const int full = sched.full_count();
    const int skip = total_steps - full;
    return static_cast<double>(total_steps) / (full + probe_fraction * skip);
}

}  // namespace tap
