#include "tap/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace tap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TrajectorySpec empty_spec(const ScenarioDims& dims) {
    TrajectorySpec spec;
    spec.batch = dims.batch;
    spec.tokens = dims.tokens;
    spec.channels = dims.channels;
    spec.total_steps = dims.total_steps;
    spec.cells.assign(
        static_cast<std::size_t>(dims.batch) * dims.tokens * dims.channels, Polynomial{{0.0}});
    return spec;
}

}  // namespace

TrajectorySpec make_heterogeneous(const ScenarioDims& dims, std::uint64_t seed) {
    SeededRng rng(seed ^ 0x68657465726f00ULL);
    TrajectorySpec spec = empty_spec(dims);
    const int T = dims.total_steps;

    for (int b = 0; b < dims.batch; ++b) {
        // Stratified class assignment: exact quarters, seeded shuffle.
        std::vector<int> classes(static_cast<std::size_t>(dims.tokens));
        for (int n = 0; n < dims.tokens; ++n) classes[n] = n % 4;
        for (int n = dims.tokens - 1; n > 0; --n) {
            std::swap(classes[n], classes[rng.uniform_int(0, n)]);
        }

        for (int n = 0; n < dims.tokens; ++n) {
            for (int d = 0; d < dims.channels; ++d) {
                TokenDynamics dyn;
                switch (classes[n]) {
                    case 0:  // constant
                        dyn = Polynomial{{rng.uniform(-2.0, 2.0)}};
                        break;
                    case 1:  // linear drift, bounded over the run
                        dyn = Polynomial{{rng.uniform(-1.0, 1.0), rng.uniform(-2.0, 2.0) / T}};
                        break;
                    case 2:  // sinusoid
                        dyn = Sinusoid{rng.uniform(0.5, 1.5), rng.uniform(1.0, 3.0),
                                       rng.uniform(0.0, kTwoPi)};
                        break;
                    default: {  // jump
                        const double before = rng.uniform(-1.0, 1.0);
                        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                        dyn = PiecewiseJump{rng.uniform_int(0, T),
                                            before, before + sign * rng.uniform(1.0, 3.0)};
                        break;
                    }
                }
                spec.cell(b, n, d) = dyn;
            }
        }
    }
    return spec;
}

TrajectorySpec make_rough_smooth(const ScenarioDims& dims, std::uint64_t seed, int warmup) {
    SeededRng rng(seed ^ 0x726f75676800ULL);
    TrajectorySpec spec = empty_spec(dims);
    const int T = dims.total_steps;
    const int jump_low = std::min(warmup + 1, T);
    const int jump_high = std::max(jump_low, T / 3);

    for (int b = 0; b < dims.batch; ++b) {
        for (int n = 0; n < dims.tokens; ++n) {
            for (int d = 0; d < dims.channels; ++d) {
                if (d % 2 == 0) {
                    spec.cell(b, n, d) = Sinusoid{rng.uniform(0.8, 1.2), rng.uniform(0.8, 1.5),
                                                  rng.uniform(0.0, kTwoPi)};
                } else {
                    const double before = rng.uniform(-1.0, 1.0);
                    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                    spec.cell(b, n, d) =
                        PiecewiseJump{rng.uniform_int(jump_low, jump_high), before,
                                      before + sign * rng.uniform(2.0, 4.0)};
                }
            }
        }
    }
    return spec;
}

TrajectorySpec make_affine(const ScenarioDims& dims, std::uint64_t seed) {
    SeededRng rng(seed ^ 0x616666696e6500ULL);
    TrajectorySpec spec = empty_spec(dims);
    for (TokenDynamics& dyn : spec.cells) {
        dyn = Polynomial{{rng.uniform(-1.0, 1.0), rng.uniform(-2.0, 2.0) / dims.total_steps}};
    }
    return spec;
}

TrajectorySpec make_quadratic(const ScenarioDims& dims, std::uint64_t seed) {
    SeededRng rng(seed ^ 0x717561640000ULL);
    TrajectorySpec spec = empty_spec(dims);
    const double T = dims.total_steps;
    for (TokenDynamics& dyn : spec.cells) {
        dyn = Polynomial{{rng.uniform(-1.0, 1.0), rng.uniform(-2.0, 2.0) / T,
                          rng.uniform(-2.0, 2.0) / (T * T)}};
    }
    return spec;
}

TrajectorySpec make_scenario(const std::string& name, const ScenarioDims& dims,
                             std::uint64_t seed, int warmup) {
    if (name == "heterogeneous") return make_heterogeneous(dims, seed);
    if (name == "rough_smooth") return make_rough_smooth(dims, seed, warmup);
    if (name == "affine") return make_affine(dims, seed);
    if (name == "quadratic") return make_quadratic(dims, seed);
    throw ConfigError("unknown scenario: " + name);
}

FeatureTensor make_initial_state(const ScenarioDims& dims, std::uint64_t seed) {
    SeededRng rng(seed ^ 0x696e697400ULL);
    FeatureTensor x(dims.batch, dims.tokens, dims.channels);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    return x;
}

}  // namespace tap
