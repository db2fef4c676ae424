#include "tap/simulator.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <type_traits>

namespace tap {

double eval_dynamics(const TokenDynamics& dyn, int step, int total_steps) {
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Polynomial>) {
                double acc = 0.0;
                double u_pow = 1.0;
                for (double c : d.coefficients) {
                    acc += c * u_pow;
                    u_pow *= static_cast<double>(step);
                }
                return acc;
            } else if constexpr (std::is_same_v<T, Sinusoid>) {
                const double arg = 2.0 * std::numbers::pi * d.frequency *
                                       static_cast<double>(step) / total_steps +
                                   d.phase;
                return d.amplitude * std::sin(arg);
            } else {
                return step < d.jump_step ? d.value_before : d.value_after;
            }
        },
        dyn);
}

TrajectorySpec TrajectorySpec::broadcast(int batch, int tokens, int channels, int total_steps,
                                         TokenDynamics dynamics) {
    TrajectorySpec spec;
    spec.batch = batch;
    spec.tokens = tokens;
    spec.channels = channels;
    spec.total_steps = total_steps;
    spec.cells.assign(static_cast<std::size_t>(batch) * tokens * channels, dynamics);
    return spec;
}

void TrajectorySpec::validate() const {
    if (batch < 1 || tokens < 1 || channels < 1 || total_steps < 1) {
        throw InvalidConfig("TrajectorySpec dimensions must be >= 1");
    }
    if (cells.size() != static_cast<std::size_t>(batch) * tokens * channels) {
        throw InvalidConfig("TrajectorySpec cell count does not match dimensions");
    }
    for (const TokenDynamics& dyn : cells) {
        if (const auto* jump = std::get_if<PiecewiseJump>(&dyn)) {
            if (jump->jump_step < 0 || jump->jump_step > total_steps) {
                throw InvalidConfig("jump_step must lie in [0, total_steps]");
            }
        }
    }
}

FeatureTensor residual_truth(const TrajectorySpec& spec, int step) {
    if (step < 0 || step >= spec.total_steps) {
        throw OutOfRange("residual_truth: step outside [0, total_steps)");
    }
    FeatureTensor out(spec.batch, spec.tokens, spec.channels);
    std::size_t i = 0;
    for (int b = 0; b < spec.batch; ++b) {
        for (int n = 0; n < spec.tokens; ++n) {
            for (int d = 0; d < spec.channels; ++d, ++i) {
                out.data()[i] = eval_dynamics(spec.cells[i], step, spec.total_steps);
            }
        }
    }
    return out;
}

FeatureTensor layer_norm(const FeatureTensor& x, double eps) {
    FeatureTensor out = FeatureTensor::zeros_like(x);
    const int channels = x.channels();
    for (int b = 0; b < x.batch(); ++b) {
        for (int n = 0; n < x.tokens(); ++n) {
            const auto in = x.token(b, n);
            auto dst = out.token(b, n);
            double mean = 0.0;
            for (int d = 0; d < channels; ++d) mean += in[d];
            mean /= channels;
            double var = 0.0;
            for (int d = 0; d < channels; ++d) {
                const double c = in[d] - mean;
                var += c * c;
            }
            var /= channels;
            const double inv = 1.0 / std::sqrt(var + eps);
            for (int d = 0; d < channels; ++d) dst[d] = (in[d] - mean) * inv;
        }
    }
    return out;
}

FeatureTensor modulate(const FeatureTensor& xn, std::span<const double> shift,
                       std::span<const double> scale) {
    const std::size_t channels = static_cast<std::size_t>(xn.channels());
    const auto broadcastable = [channels](std::span<const double> v) {
        return v.size() == 1 || v.size() == channels;
    };
    if (!broadcastable(shift) || !broadcastable(scale)) {
        throw ShapeMismatch("modulate: shift/scale must have 1 or channel-count entries");
    }
    FeatureTensor out = FeatureTensor::zeros_like(xn);
    for (int b = 0; b < xn.batch(); ++b) {
        for (int n = 0; n < xn.tokens(); ++n) {
            const auto in = xn.token(b, n);
            auto dst = out.token(b, n);
            for (std::size_t d = 0; d < channels; ++d) {
                const double g = scale[scale.size() == 1 ? 0 : d];
                const double s = shift[shift.size() == 1 ? 0 : d];
                dst[d] = g * in[d] + s;
            }
        }
    }
    return out;
}

ModulationSchedule ModulationSchedule::identity() {
    ModulationSchedule sched;
    sched.shift = [](int) { return std::vector<double>{0.0}; };
    sched.scale = [](int) { return std::vector<double>{1.0}; };
    return sched;
}

std::string to_string(ProbeMode mode) {
    switch (mode) {
        case ProbeMode::Modulated: return "modulated";
        case ProbeMode::RawInput: return "raw_input";
        case ProbeMode::TruthResidual: return "truth_residual";
    }
    return "modulated";
}

ProbeMode probe_mode_from_string(const std::string& name) {
    if (name == "modulated") return ProbeMode::Modulated;
    if (name == "raw_input") return ProbeMode::RawInput;
    if (name == "truth_residual") return ProbeMode::TruthResidual;
    throw InvalidConfig("unknown probe mode: " + name);
}

Denoiser make_denoiser(const TrajectorySpec& spec, const ModulationSchedule& sched,
                       ProbeMode mode) {
    spec.validate();
    Denoiser den;
    den.full_eval = [spec](const FeatureTensor& x, int step) {
        return x + residual_truth(spec, step);
    };
    switch (mode) {
        case ProbeMode::Modulated:
            den.probe_eval = [spec, sched](const FeatureTensor& x, int step) {
                const std::vector<double> s = sched.shift(step);
                const std::vector<double> g = sched.scale(step);
                return modulate(layer_norm(x, sched.norm_epsilon), s, g);
            };
            break;
        case ProbeMode::RawInput:
            den.probe_eval = [](const FeatureTensor& x, int) { return x; };
            break;
        case ProbeMode::TruthResidual:
            den.probe_eval = [spec](const FeatureTensor& x, int step) {
                (void)x;
                return residual_truth(spec, step);
            };
            break;
    }
    return den;
}

SelectionMap oracle_best(const std::vector<FeatureTensor>& candidates,
                         const FeatureTensor& truth, const ProxyMetric& metric,
                         const std::vector<bool>& active) {
    LossMatrix losses;
    losses.batch = truth.batch();
    losses.tokens = truth.tokens();
    losses.active.assign(candidates.size(), true);
    if (!active.empty()) {
        if (active.size() != candidates.size()) {
            throw LengthMismatch("oracle_best: active mask size mismatch");
        }
        losses.active = active;
    }
    losses.per_predictor.resize(candidates.size());
    for (std::size_t p = 0; p < candidates.size(); ++p) {
        if (!losses.active[p]) {
            losses.per_predictor[p] = TokenMatrix(losses.batch, losses.tokens,
                                                  std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        losses.per_predictor[p] = proxy_loss(candidates[p], truth, metric);
    }
    return select(losses);
}

}  // namespace tap
