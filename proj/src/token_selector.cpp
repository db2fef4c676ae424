#include "tap/token_selector.hpp"

#include <cmath>
#include <limits>

namespace tap {

std::string to_string(DistanceKind kind) {
    switch (kind) {
        case DistanceKind::Cosine: return "cosine";
        case DistanceKind::L1: return "l1";
        case DistanceKind::Mse: return "mse";
    }
    return "cosine";
}

DistanceKind distance_kind_from_string(const std::string& name) {
    if (name == "cosine") return DistanceKind::Cosine;
    if (name == "l1") return DistanceKind::L1;
    if (name == "mse") return DistanceKind::Mse;
    throw InvalidConfig("unknown distance metric: " + name);
}

double cosine_distance(std::span<const double> a, std::span<const double> b, double eps) {
    if (a.size() != b.size() || a.empty()) {
        throw LengthMismatch("cosine_distance: vectors must have equal nonzero length");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    const bool a_degenerate = na < eps;
    const bool b_degenerate = nb < eps;
    if (a_degenerate && b_degenerate) return 0.0;
    if (a_degenerate || b_degenerate) return 2.0;
    return 1.0 - dot / (na * nb);
}

TokenMatrix proxy_loss(const FeatureTensor& predicted, const FeatureTensor& actual,
                       const ProxyMetric& metric) {
    predicted.require_same_shape(actual);
    metric.validate();
    TokenMatrix out(predicted.batch(), predicted.tokens());
    const int channels = predicted.channels();
    for (int b = 0; b < predicted.batch(); ++b) {
        for (int n = 0; n < predicted.tokens(); ++n) {
            const auto p = predicted.token(b, n);
            const auto a = actual.token(b, n);
            double loss = 0.0;
            switch (metric.kind) {
                case DistanceKind::Cosine:
                    loss = cosine_distance(p, a, metric.epsilon);
                    break;
                case DistanceKind::L1: {
                    double acc = 0.0;
                    for (int d = 0; d < channels; ++d) acc += std::abs(p[d] - a[d]);
                    loss = acc / channels;
                    break;
                }
                case DistanceKind::Mse: {
                    double acc = 0.0;
                    for (int d = 0; d < channels; ++d) {
                        const double diff = p[d] - a[d];
                        acc += diff * diff;
                    }
                    loss = acc / channels;
                    break;
                }
            }
            out.at(b, n) = loss;
        }
    }
    return out;
}

SelectionMap select(const LossMatrix& losses) {
    int lowest_active = -1;
    for (std::size_t p = 0; p < losses.predictors(); ++p) {
        if (p < losses.active.size() && losses.active[p]) {
            lowest_active = static_cast<int>(p);
            break;
        }
    }
    if (lowest_active < 0) throw NoActivePredictor("select: no active predictor");

    SelectionMap sel;
    sel.batch = losses.batch;
    sel.tokens = losses.tokens;
    const std::size_t count = static_cast<std::size_t>(losses.batch) * losses.tokens;
    sel.chosen.assign(count, lowest_active);
    sel.chosen_loss.assign(count, 0.0);

    for (int b = 0; b < losses.batch; ++b) {
        for (int n = 0; n < losses.tokens; ++n) {
            int best = -1;
            double best_loss = std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < losses.predictors(); ++p) {
                if (!losses.active[p]) continue;
                const double v = losses.per_predictor[p].at(b, n);
                if (!std::isfinite(v)) continue;
                if (v < best_loss) {
                    best_loss = v;
                    best = static_cast<int>(p);
                }
            }
            const std::size_t idx = static_cast<std::size_t>(b) * losses.tokens + n;
            if (best < 0) {
                sel.chosen[idx] = lowest_active;
                sel.chosen_loss[idx] = losses.per_predictor[lowest_active].at(b, n);
                ++sel.degenerate_count;
            } else {
                sel.chosen[idx] = best;
                sel.chosen_loss[idx] = best_loss;
            }
        }
    }
    return sel;
}

FeatureTensor assemble_residual(const SelectionMap& selection,
                                const std::vector<FeatureTensor>& candidates) {
    const FeatureTensor* shape_ref = nullptr;
    for (const FeatureTensor& c : candidates) {
        if (c.empty()) continue;
        if (shape_ref == nullptr) {
            shape_ref = &c;
        } else {
            shape_ref->require_same_shape(c);
        }
    }
    if (shape_ref == nullptr) throw ShapeMismatch("assemble_residual: no candidate tensors");
    if (shape_ref->batch() != selection.batch || shape_ref->tokens() != selection.tokens) {
        throw ShapeMismatch("assemble_residual: selection and candidate shapes differ");
    }

    FeatureTensor out = FeatureTensor::zeros_like(*shape_ref);
    const int channels = shape_ref->channels();
    for (int b = 0; b < selection.batch; ++b) {
        for (int n = 0; n < selection.tokens; ++n) {
            const int p = selection.chosen_at(b, n);
            if (p < 0 || p >= static_cast<int>(candidates.size())) {
                throw IndexOutOfRange("assemble_residual: chosen index " + std::to_string(p));
            }
            const FeatureTensor& src = candidates[p];
            if (src.empty()) {
                throw IndexOutOfRange("assemble_residual: chosen candidate " +
                                      std::to_string(p) + " has no tensor");
            }
            const auto from = src.token(b, n);
            auto to = out.token(b, n);
            for (int d = 0; d < channels; ++d) to[d] = from[d];
        }
    }
    return out;
}

}  // namespace tap
