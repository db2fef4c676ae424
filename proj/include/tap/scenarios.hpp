#pragma once

#include <cstdint>
#include <string>

#include "tap/simulator.hpp"

namespace tap {

// Deterministic uniform generator (splitmix64). Sequences are identical
// across platforms and standard libraries.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        // splitmix64; small, fast and fully reproducible
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive integer range.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

struct ScenarioDims {
    int batch = 1;
    int tokens = 32;
    int channels = 8;
    int total_steps = 50;
};

// Mixed-dynamics suite: equal parts constant, linear, sinusoid (frequency
// 1-3) and jump tokens, with per-channel parameter draws so no single global
// predictor dominates.
TrajectorySpec make_heterogeneous(const ScenarioDims& dims, std::uint64_t seed);

// Rough-early/smooth-late suite: every token mixes smooth sinusoid channels
// with jump channels whose jump steps concentrate in the early third of the
// run, so the selected order should rise as the run proceeds.
TrajectorySpec make_rough_smooth(const ScenarioDims& dims, std::uint64_t seed, int warmup);

// Every cell follows an affine residual trajectory.
TrajectorySpec make_affine(const ScenarioDims& dims, std::uint64_t seed);

// Every cell follows a quadratic residual trajectory.
TrajectorySpec make_quadratic(const ScenarioDims& dims, std::uint64_t seed);

TrajectorySpec make_scenario(const std::string& name, const ScenarioDims& dims,
                             std::uint64_t seed, int warmup);

FeatureTensor make_initial_state(const ScenarioDims& dims, std::uint64_t seed);

}  // namespace tap
