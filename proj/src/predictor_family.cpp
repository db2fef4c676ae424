#include "tap/predictor_family.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace tap {

namespace {

constexpr int kMaxTaylorOrder = 12;

// Exact integer factorial; orders above kMaxTaylorOrder are rejected before
// this is reached.
double factorial(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
    return static_cast<double>(f);
}

double ipow(double base, int exp) {
    double r = 1.0;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace

std::string PredictorSpec::label() const {
    if (is_taylor()) {
        return "taylor(m=" + std::to_string(taylor().order) +
               ",o=" + std::to_string(taylor().horizon_offset) + ")";
    }
    return "hermite(m=" + std::to_string(hermite().order) +
           ",K=" + std::to_string(hermite().window) + ")";
}

void FamilyConfig::validate() const {
    if (order_low < 0) throw InvalidConfig("order_low must be >= 0");
    if (order_high < order_low) throw InvalidConfig("order_high must be >= order_low");
    if (order_high > 12) throw InvalidConfig("Taylor orders above 12 are unsupported");
    if (lambda < 0) throw InvalidConfig("lambda must be >= 0");
    if (delta < 1) throw InvalidConfig("delta must be >= 1");
    if (include_hermite) {
        if (hermite_order < 0) throw InvalidConfig("hermite_order must be >= 0");
        if (hermite_window < hermite_order + 1) {
            throw InvalidConfig("hermite_window must be >= hermite_order + 1");
        }
    }
}

int FamilyConfig::required_capacity() const {
    validate();
    int cap = order_high + 1;
    if (include_hermite) cap = std::max(cap, hermite_window);
    return cap;
}

std::vector<PredictorSpec> build_family(const FamilyConfig& cfg) {
    cfg.validate();
    const int offsets = (cfg.lambda + 1) / cfg.delta;
    std::vector<PredictorSpec> family;
    family.reserve(static_cast<std::size_t>(offsets) * (cfg.order_high - cfg.order_low + 1) +
                   (cfg.include_hermite ? 1 : 0));
    for (int j = 0; j < offsets; ++j) {
        for (int m = cfg.order_low; m <= cfg.order_high; ++m) {
            family.push_back({TaylorSpec{m, j * cfg.delta}});
        }
    }
    if (cfg.include_hermite) {
        family.push_back({HermiteSpec{cfg.hermite_order, cfg.hermite_window}});
    }
    return family;
}

FeatureTensor taylor_predict(const DifferenceStack& stack, int order, int k_p,
                             int normalization) {
    if (order < 0) throw InvalidConfig("taylor order must be >= 0");
    if (order > kMaxTaylorOrder) throw InvalidConfig("Taylor orders above 12 are unsupported");
    if (k_p < 0) throw InvalidConfig("k_p must be >= 0");
    if (normalization < 1) throw InvalidConfig("normalization must be >= 1");

    std::vector<FeatureTensor> diffs = stack.differences(order);
    FeatureTensor out = diffs[0];
    for (int i = 1; i <= order; ++i) {
        const double coeff =
            ipow(-static_cast<double>(k_p), i) / (factorial(i) * ipow(normalization, i));
        out.axpy(coeff, diffs[i]);
    }
    return out;
}

std::vector<double> hermite_basis(int order, double t) {
    if (order < 0) throw InvalidConfig("hermite order must be >= 0");
    std::vector<double> he(static_cast<std::size_t>(order) + 1);
    he[0] = 1.0;
    if (order >= 1) he[1] = t;
    for (int k = 1; k < order; ++k) {
        he[k + 1] = t * he[k] - static_cast<double>(k) * he[k - 1];
    }
    return he;
}

HermiteFit hermite_fit(std::span<const Snapshot> snapshots, int order, int window) {
    if (order < 0) throw InvalidConfig("hermite order must be >= 0");
    if (window < order + 1) {
        throw InsufficientSnapshots("hermite_fit: window " + std::to_string(window) +
                                    " smaller than order+1 = " + std::to_string(order + 1));
    }
    if (static_cast<int>(snapshots.size()) < window) {
        throw InsufficientSnapshots("hermite_fit: needed " + std::to_string(window) +
                                    " snapshots, have " + std::to_string(snapshots.size()));
    }

    const std::size_t first = snapshots.size() - static_cast<std::size_t>(window);
    const int oldest_step = snapshots[first].step_index;
    const int newest_step = snapshots[snapshots.size() - 1].step_index;
    if (newest_step == oldest_step) {
        throw SingularSystem("hermite_fit: degenerate time mapping (equal step indices)");
    }

    HermiteFit fit;
    fit.oldest_step = oldest_step;
    fit.newest_step = newest_step;

    const int basis = order + 1;
    // Design matrix rows He_k(t_j), shared across every scalar series.
    std::vector<std::vector<double>> design(static_cast<std::size_t>(window));
    for (int j = 0; j < window; ++j) {
        const double t = fit.normalized_time(snapshots[first + j].step_index);
        design[j] = hermite_basis(order, t);
    }

    // Normal equations G c = A^T y with G = A^T A, factored once by Gaussian
    // elimination with partial pivoting; the factorization is replayed for
    // every (batch, token, channel) series.
    std::vector<double> gram(static_cast<std::size_t>(basis) * basis, 0.0);
    for (int j = 0; j < window; ++j) {
        for (int a = 0; a < basis; ++a) {
            for (int b = 0; b < basis; ++b) {
                gram[a * basis + b] += design[j][a] * design[j][b];
            }
        }
    }

    // LU with partial pivoting on the gram matrix.
    std::vector<int> perm(basis);
    for (int i = 0; i < basis; ++i) perm[i] = i;
    for (int col = 0; col < basis; ++col) {
        int pivot = col;
        double best = std::abs(gram[perm[col] * basis + col]);
        for (int r = col + 1; r < basis; ++r) {
            const double v = std::abs(gram[perm[r] * basis + col]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < 1e-12) throw SingularSystem("hermite_fit: singular normal equations");
        std::swap(perm[col], perm[pivot]);
        const double diag = gram[perm[col] * basis + col];
        for (int r = col + 1; r < basis; ++r) {
            const double factor = gram[perm[r] * basis + col] / diag;
            gram[perm[r] * basis + col] = factor;
            for (int c = col + 1; c < basis; ++c) {
                gram[perm[r] * basis + c] -= factor * gram[perm[col] * basis + c];
            }
        }
    }

    const FeatureTensor& shape_ref = snapshots[first].value;
    for (std::size_t j = first; j < snapshots.size(); ++j) {
        shape_ref.require_same_shape(snapshots[j].value);
    }
    fit.coeff.assign(static_cast<std::size_t>(basis), FeatureTensor::zeros_like(shape_ref));

    std::vector<double> rhs(static_cast<std::size_t>(basis));
    std::vector<double> sol(static_cast<std::size_t>(basis));
    for (std::size_t e = 0; e < shape_ref.size(); ++e) {
        for (int a = 0; a < basis; ++a) {
            double acc = 0.0;
            for (int j = 0; j < window; ++j) {
                acc += design[j][a] * snapshots[first + j].value.data()[e];
            }
            rhs[a] = acc;
        }
        // forward substitution
        for (int r = 0; r < basis; ++r) {
            double acc = rhs[perm[r]];
            for (int c = 0; c < r; ++c) acc -= gram[perm[r] * basis + c] * sol[c];
            sol[r] = acc;
        }
        // back substitution
        for (int r = basis - 1; r >= 0; --r) {
            for (int c = r + 1; c < basis; ++c) sol[r] -= gram[perm[r] * basis + c] * sol[c];
            sol[r] /= gram[perm[r] * basis + r];
        }
        for (int a = 0; a < basis; ++a) fit.coeff[a].data()[e] = sol[a];
    }
    return fit;
}

FeatureTensor hermite_predict(const std::vector<FeatureTensor>& coeff,
                              double target_normalized_time) {
    if (coeff.empty()) throw InvalidConfig("hermite_predict: empty coefficients");
    const std::vector<double> he =
        hermite_basis(static_cast<int>(coeff.size()) - 1, target_normalized_time);
    FeatureTensor out = coeff[0];
    out.scale(he[0]);
    for (std::size_t k = 1; k < coeff.size(); ++k) {
        out.axpy(he[k], coeff[k]);
    }
    return out;
}

std::optional<FeatureTensor> predict(const PredictorSpec& spec, const DifferenceStack& stack,
                                     int k, int normalization) {
    if (k < 1) throw InvalidConfig("predict: k must be >= 1");
    if (spec.is_taylor()) {
        const TaylorSpec& ts = spec.taylor();
        const int k_p = k - ts.horizon_offset;
        if (k_p < 0) return std::nullopt;
        return taylor_predict(stack, ts.order, k_p, normalization);
    }
    const HermiteSpec& hs = spec.hermite();
    std::vector<Snapshot> snaps;
    snaps.reserve(stack.size());
    for (std::size_t i = 0; i < stack.size(); ++i) snaps.push_back(stack.at(i));
    HermiteFit fit = hermite_fit(snaps, hs.order, hs.window);
    const double target = fit.normalized_time(stack.newest().step_index + k);
    return hermite_predict(fit.coeff, target);
}

}  // namespace tap
