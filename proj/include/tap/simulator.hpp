#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tap/denoiser.hpp"
#include "tap/tensor.hpp"
#include "tap/token_selector.hpp"

namespace tap {

// Per-cell ground-truth residual dynamics, expressed in the sampling-order
// step index u (trajectories read left to right in traces).
struct Polynomial {
    std::vector<double> coefficients;  // c0 + c1*u + c2*u^2 + ...
};

struct Sinusoid {
    double amplitude = 1.0;
    double frequency = 1.0;  // cycles per run
    double phase = 0.0;
};

struct PiecewiseJump {
    int jump_step = 0;
    double value_before = 0.0;
    double value_after = 0.0;
};

using TokenDynamics = std::variant<Polynomial, Sinusoid, PiecewiseJump>;

double eval_dynamics(const TokenDynamics& dyn, int step, int total_steps);

// Ground-truth residual trajectories for every (batch, token, channel) cell.
struct TrajectorySpec {
    int batch = 1;
    int tokens = 1;
    int channels = 1;
    int total_steps = 1;
    std::vector<TokenDynamics> cells;  // batch * tokens * channels entries

    static TrajectorySpec broadcast(int batch, int tokens, int channels, int total_steps,
                                    TokenDynamics dynamics);

    const TokenDynamics& cell(int b, int n, int d) const {
        return cells[(static_cast<std::size_t>(b) * tokens + n) * channels + d];
    }
    TokenDynamics& cell(int b, int n, int d) {
        return cells[(static_cast<std::size_t>(b) * tokens + n) * channels + d];
    }

    void validate() const;
};

FeatureTensor residual_truth(const TrajectorySpec& spec, int step);

// Per-token channel normalization: (x - mean) / sqrt(var + eps) with the
// population variance taken over channels.
FeatureTensor layer_norm(const FeatureTensor& x, double eps);

// Adaptive-norm modulation g * xn + s. Shift/scale are per-channel vectors;
// length-1 spans broadcast.
FeatureTensor modulate(const FeatureTensor& xn, std::span<const double> shift,
                       std::span<const double> scale);

struct ModulationSchedule {
    std::function<std::vector<double>(int)> shift;
    std::function<std::vector<double>(int)> scale;
    double norm_epsilon = 1e-6;

    static ModulationSchedule identity();
};

enum class ProbeMode { Modulated, RawInput, TruthResidual };

std::string to_string(ProbeMode mode);
ProbeMode probe_mode_from_string(const std::string& name);

// full_eval(x, u) = x + residual_truth(spec, u); probe_eval per mode.
Denoiser make_denoiser(const TrajectorySpec& spec, const ModulationSchedule& sched,
                       ProbeMode mode);

// Brute-force comparator: per-token argmin of metric(candidate, truth), with
// the same tie-break and non-finite handling as select(). The active mask
// defaults to all-active when empty.
SelectionMap oracle_best(const std::vector<FeatureTensor>& candidates,
                         const FeatureTensor& truth, const ProxyMetric& metric,
                         const std::vector<bool>& active = {});

}  // namespace tap
