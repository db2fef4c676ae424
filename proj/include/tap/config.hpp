#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tap/engine.hpp"
#include "tap/scenarios.hpp"
#include "tap/simulator.hpp"

namespace tap {

// Flat `key = value` text, `#` comments, UTF-8. Later assignments win, so
// command-line overrides are applied by re-assigning keys.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> load_key_value_file(const std::string& path);

// One inline token class, spelled `token_class.<i>.<field> = ...` in the
// config file. Tokens are distributed over classes by their `fraction`
// weights with a seeded shuffle.
struct TokenClassConfig {
    std::string kind;  // constant | polynomial | sinusoid | jump
    double fraction = 1.0;
    std::vector<double> coefficients;  // polynomial
    double amplitude = 1.0;            // sinusoid
    double frequency = 1.0;
    double phase = 0.0;
    bool random_phase = false;
    int jump_step = -1;  // -1: seeded uniform draw per cell
    double value_before = 0.0;
    double value_after = 1.0;
};

struct ExperimentConfig {
    int batch = 1;
    int tokens = 32;
    int channels = 8;
    int total_steps = 50;
    int window = 5;
    int warmup = 3;

    FamilyConfig family;
    ProxyMetric metric;

    std::string strategy = "tap";  // exact | reuse | global | threshold | tap
    int global_order = 2;
    int global_offset = 0;
    double threshold_l = 1.0;

    std::string scenario = "heterogeneous";  // named scenario or "inline"
    std::vector<TokenClassConfig> token_classes;

    ProbeMode probe_mode = ProbeMode::Modulated;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    double probe_fraction = 0.0;

    static ExperimentConfig from_key_values(const std::map<std::string, std::string>& kv);

    void validate() const;

    ScenarioDims dims() const { return {batch, tokens, channels, total_steps}; }
    Schedule schedule() const { return {total_steps, window, warmup}; }
    Strategy make_strategy() const;
    EngineConfig engine_config() const;
    TrajectorySpec build_trajectory(std::uint64_t seed_value) const;
};

}  // namespace tap
