#include "tap/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace tap {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected integer, got '" + value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "': expected boolean, got '" + value + "'");
}

std::vector<double> parse_real_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_real(key, item));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': expected list of numbers");
    return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        kv[key] = value;
    }
    return kv;
}

std::map<std::string, std::string> load_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_key_values(buffer.str());
}

ExperimentConfig ExperimentConfig::from_key_values(
    const std::map<std::string, std::string>& kv) {
    ExperimentConfig cfg;
    std::set<std::string> seen;

    const auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        seen.insert(key);
        return it->second;
    };

    if (auto v = take("batch")) cfg.batch = static_cast<int>(parse_int("batch", *v));
    if (auto v = take("tokens")) cfg.tokens = static_cast<int>(parse_int("tokens", *v));
    if (auto v = take("channels")) cfg.channels = static_cast<int>(parse_int("channels", *v));
    if (auto v = take("steps")) cfg.total_steps = static_cast<int>(parse_int("steps", *v));
    if (auto v = take("window")) cfg.window = static_cast<int>(parse_int("window", *v));
    if (auto v = take("warmup")) cfg.warmup = static_cast<int>(parse_int("warmup", *v));

    if (auto v = take("order_low")) cfg.family.order_low = static_cast<int>(parse_int("order_low", *v));
    if (auto v = take("order_high")) cfg.family.order_high = static_cast<int>(parse_int("order_high", *v));
    if (auto v = take("lambda")) cfg.family.lambda = static_cast<int>(parse_int("lambda", *v));
    if (auto v = take("delta")) cfg.family.delta = static_cast<int>(parse_int("delta", *v));
    if (auto v = take("hermite")) cfg.family.include_hermite = parse_bool("hermite", *v);
    if (auto v = take("hermite_order"))
        cfg.family.hermite_order = static_cast<int>(parse_int("hermite_order", *v));
    if (auto v = take("hermite_window"))
        cfg.family.hermite_window = static_cast<int>(parse_int("hermite_window", *v));

    if (auto v = take("metric")) {
        try {
            cfg.metric.kind = distance_kind_from_string(*v);
        } catch (const InvalidConfig& e) {
            throw ConfigError(std::string("config key 'metric': ") + e.what());
        }
    }
    if (auto v = take("metric_epsilon")) cfg.metric.epsilon = parse_real("metric_epsilon", *v);

    if (auto v = take("strategy")) cfg.strategy = *v;
    if (auto v = take("global_order"))
        cfg.global_order = static_cast<int>(parse_int("global_order", *v));
    if (auto v = take("global_offset"))
        cfg.global_offset = static_cast<int>(parse_int("global_offset", *v));
    if (auto v = take("threshold_l")) cfg.threshold_l = parse_real("threshold_l", *v);

    if (auto v = take("scenario")) cfg.scenario = *v;
    if (auto v = take("probe_mode")) {
        try {
            cfg.probe_mode = probe_mode_from_string(*v);
        } catch (const InvalidConfig& e) {
            throw ConfigError(std::string("config key 'probe_mode': ") + e.what());
        }
    }
    if (auto v = take("seed"))
        cfg.seed = static_cast<std::uint64_t>(parse_int("seed", *v));
    if (auto v = take("out_dir")) cfg.out_dir = *v;
    if (auto v = take("probe_fraction")) cfg.probe_fraction = parse_real("probe_fraction", *v);

    // Inline token classes: token_class.<index>.<field>
    std::map<int, TokenClassConfig> classes;
    for (const auto& [key, value] : kv) {
        if (key.rfind("token_class.", 0) != 0) continue;
        seen.insert(key);
        const std::string rest = key.substr(std::string("token_class.").size());
        const std::size_t dot = rest.find('.');
        if (dot == std::string::npos) {
            throw ConfigError("config key '" + key + "': expected token_class.<i>.<field>");
        }
        const int idx = static_cast<int>(parse_int(key, rest.substr(0, dot)));
        const std::string field = rest.substr(dot + 1);
        TokenClassConfig& tc = classes[idx];
        if (field == "kind") {
            tc.kind = value;
        } else if (field == "fraction") {
            tc.fraction = parse_real(key, value);
        } else if (field == "coefficients") {
            tc.coefficients = parse_real_list(key, value);
        } else if (field == "amplitude") {
            tc.amplitude = parse_real(key, value);
        } else if (field == "frequency") {
            tc.frequency = parse_real(key, value);
        } else if (field == "phase") {
            tc.phase = parse_real(key, value);
        } else if (field == "random_phase") {
            tc.random_phase = parse_bool(key, value);
        } else if (field == "jump_step") {
            tc.jump_step = static_cast<int>(parse_int(key, value));
        } else if (field == "value_before") {
            tc.value_before = parse_real(key, value);
        } else if (field == "value_after") {
            tc.value_after = parse_real(key, value);
        } else {
            throw ConfigError("config key '" + key + "': unknown token class field");
        }
    }
    for (auto& [idx, tc] : classes) cfg.token_classes.push_back(tc);

    for (const auto& [key, value] : kv) {
        (void)value;
        if (!seen.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }

    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    if (batch < 1) throw ConfigError("config key 'batch': must be >= 1");
    if (tokens < 1) throw ConfigError("config key 'tokens': must be >= 1");
    if (channels < 1) throw ConfigError("config key 'channels': must be >= 1");
    if (total_steps < 1) throw ConfigError("config key 'steps': must be >= 1");
    if (window < 1) throw ConfigError("config key 'window': must be >= 1");
    if (warmup < 1) throw ConfigError("config key 'warmup': must be >= 1");
    if (total_steps < warmup) throw ConfigError("config key 'steps': must be >= warmup");
    try {
        family.validate();
        metric.validate();
    } catch (const InvalidConfig& e) {
        throw ConfigError(e.what());
    }
    if (strategy != "exact" && strategy != "reuse" && strategy != "global" &&
        strategy != "threshold" && strategy != "tap") {
        throw ConfigError("config key 'strategy': unknown strategy '" + strategy + "'");
    }
    if (!(probe_fraction >= 0.0) || probe_fraction > 1.0) {
        throw ConfigError("config key 'probe_fraction': must lie in [0, 1]");
    }
    if (scenario == "inline") {
        if (token_classes.empty()) {
            throw ConfigError("config key 'scenario': inline scenario needs token_class.* keys");
        }
        for (std::size_t i = 0; i < token_classes.size(); ++i) {
            const TokenClassConfig& tc = token_classes[i];
            const std::string where = "token_class." + std::to_string(i);
            if (tc.kind != "constant" && tc.kind != "polynomial" && tc.kind != "sinusoid" &&
                tc.kind != "jump") {
                throw ConfigError("config key '" + where + ".kind': unknown kind '" + tc.kind +
                                  "'");
            }
            if (!(tc.fraction > 0.0)) {
                throw ConfigError("config key '" + where + ".fraction': must be > 0");
            }
        }
    }
}

Strategy ExperimentConfig::make_strategy() const {
    if (strategy == "exact") return ExactStrategy{};
    if (strategy == "reuse") return ReuseStrategy{};
    if (strategy == "global") {
        return GlobalStrategy{PredictorSpec{TaylorSpec{global_order, global_offset}}};
    }
    if (strategy == "threshold") return ThresholdStrategy{threshold_l};
    return TapStrategy{};
}

EngineConfig ExperimentConfig::engine_config() const {
    EngineConfig ec;
    ec.schedule = schedule();
    ec.family = family;
    ec.metric = metric;
    ec.strategy = make_strategy();
    ec.seed = seed.value_or(0);
    return ec;
}

TrajectorySpec ExperimentConfig::build_trajectory(std::uint64_t seed_value) const {
    if (scenario != "inline") {
        return make_scenario(scenario, dims(), seed_value, warmup);
    }

    SeededRng rng(seed_value ^ 0x696e6c696e6500ULL);
    TrajectorySpec spec;
    spec.batch = batch;
    spec.tokens = tokens;
    spec.channels = channels;
    spec.total_steps = total_steps;
    spec.cells.assign(static_cast<std::size_t>(batch) * tokens * channels, Polynomial{{0.0}});

    double total_fraction = 0.0;
    for (const TokenClassConfig& tc : token_classes) total_fraction += tc.fraction;

    for (int b = 0; b < batch; ++b) {
        // Largest-remainder apportionment of tokens over classes, then a
        // seeded shuffle of the assignment.
        std::vector<int> counts(token_classes.size(), 0);
        std::vector<std::pair<double, std::size_t>> remainders;
        int assigned = 0;
        for (std::size_t c = 0; c < token_classes.size(); ++c) {
            const double exact = tokens * token_classes[c].fraction / total_fraction;
            counts[c] = static_cast<int>(exact);
            assigned += counts[c];
            remainders.push_back({exact - counts[c], c});
        }
        std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (int i = 0; assigned < tokens; ++i, ++assigned) {
            ++counts[remainders[i % remainders.size()].second];
        }

        std::vector<int> assignment;
        assignment.reserve(static_cast<std::size_t>(tokens));
        for (std::size_t c = 0; c < token_classes.size(); ++c) {
            assignment.insert(assignment.end(), counts[c], static_cast<int>(c));
        }
        for (int n = tokens - 1; n > 0; --n) {
            std::swap(assignment[n], assignment[rng.uniform_int(0, n)]);
        }

        for (int n = 0; n < tokens; ++n) {
            const TokenClassConfig& tc = token_classes[assignment[n]];
            for (int d = 0; d < channels; ++d) {
                if (tc.kind == "constant") {
                    spec.cell(b, n, d) = Polynomial{
                        {tc.coefficients.empty() ? rng.uniform(-1.0, 1.0) : tc.coefficients[0]}};
                } else if (tc.kind == "polynomial") {
                    spec.cell(b, n, d) = Polynomial{tc.coefficients.empty()
                                                        ? std::vector<double>{0.0}
                                                        : tc.coefficients};
                } else if (tc.kind == "sinusoid") {
                    const double phase =
                        tc.random_phase ? rng.uniform(0.0, 6.283185307179586) : tc.phase;
                    spec.cell(b, n, d) = Sinusoid{tc.amplitude, tc.frequency, phase};
                } else {
                    const int jump = tc.jump_step >= 0 ? tc.jump_step
                                                       : rng.uniform_int(0, total_steps);
                    spec.cell(b, n, d) = PiecewiseJump{jump, tc.value_before, tc.value_after};
                }
            }
        }
    }
    return spec;
}

}  // namespace tap
