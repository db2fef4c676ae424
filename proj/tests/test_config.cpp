#include <doctest.h>

#include "tap/config.hpp"

TEST_CASE("key-value parsing with comments and blank lines") {
    const auto kv = tap::parse_key_values(
        "# a comment\n"
        "steps = 20\n"
        "\n"
        "window = 4   # trailing comment\n"
        "scenario = affine\n");
    CHECK(kv.at("steps") == "20");
    CHECK(kv.at("window") == "4");
    CHECK(kv.at("scenario") == "affine");
}

TEST_CASE("malformed lines are rejected") {
    CHECK_THROWS_AS(tap::parse_key_values("steps 20\n"), tap::ConfigError);
    CHECK_THROWS_AS(tap::parse_key_values("= 20\n"), tap::ConfigError);
}

TEST_CASE("experiment config from key values") {
    const auto cfg = tap::ExperimentConfig::from_key_values(tap::parse_key_values(
        "batch = 2\n"
        "tokens = 16\n"
        "channels = 4\n"
        "steps = 20\n"
        "window = 5\n"
        "warmup = 3\n"
        "order_high = 2\n"
        "lambda = 4\n"
        "metric = l1\n"
        "strategy = tap\n"
        "scenario = heterogeneous\n"
        "probe_mode = truth_residual\n"
        "seed = 7\n"));
    CHECK(cfg.batch == 2);
    CHECK(cfg.tokens == 16);
    CHECK(cfg.metric.kind == tap::DistanceKind::L1);
    CHECK(cfg.probe_mode == tap::ProbeMode::TruthResidual);
    REQUIRE(cfg.seed.has_value());
    CHECK(*cfg.seed == 7);
}

TEST_CASE("unknown keys name the offending key") {
    try {
        tap::ExperimentConfig::from_key_values(tap::parse_key_values("stepz = 20\n"));
        FAIL("expected ConfigError");
    } catch (const tap::ConfigError& e) {
        CHECK(std::string(e.what()).find("stepz") != std::string::npos);
    }
}

TEST_CASE("bad values name the offending key") {
    try {
        tap::ExperimentConfig::from_key_values(tap::parse_key_values("steps = soon\n"));
        FAIL("expected ConfigError");
    } catch (const tap::ConfigError& e) {
        CHECK(std::string(e.what()).find("steps") != std::string::npos);
    }
}

TEST_CASE("invalid strategy is rejected") {
    CHECK_THROWS_AS(
        tap::ExperimentConfig::from_key_values(tap::parse_key_values("strategy = blur\n")),
        tap::ConfigError);
}

TEST_CASE("inline scenario parses token classes") {
    const auto cfg = tap::ExperimentConfig::from_key_values(tap::parse_key_values(
        "tokens = 8\n"
        "channels = 2\n"
        "steps = 12\n"
        "scenario = inline\n"
        "seed = 3\n"
        "token_class.0.kind = sinusoid\n"
        "token_class.0.amplitude = 1.5\n"
        "token_class.0.frequency = 2\n"
        "token_class.0.fraction = 0.5\n"
        "token_class.1.kind = jump\n"
        "token_class.1.jump_step = 6\n"
        "token_class.1.value_before = 0\n"
        "token_class.1.value_after = 2\n"
        "token_class.1.fraction = 0.5\n"));
    REQUIRE(cfg.token_classes.size() == 2);
    CHECK(cfg.token_classes[0].kind == "sinusoid");
    CHECK(cfg.token_classes[0].amplitude == doctest::Approx(1.5));
    CHECK(cfg.token_classes[1].jump_step == 6);

    const auto spec = cfg.build_trajectory(3);
    int sinusoids = 0, jumps = 0;
    for (int n = 0; n < 8; ++n) {
        if (std::holds_alternative<tap::Sinusoid>(spec.cell(0, n, 0))) ++sinusoids;
        if (std::holds_alternative<tap::PiecewiseJump>(spec.cell(0, n, 0))) ++jumps;
    }
    CHECK(sinusoids == 4);
    CHECK(jumps == 4);
}

TEST_CASE("inline scenario with no classes is rejected") {
    CHECK_THROWS_AS(
        tap::ExperimentConfig::from_key_values(tap::parse_key_values("scenario = inline\n")),
        tap::ConfigError);
}

TEST_CASE("strategy variants construct") {
    auto kv = tap::parse_key_values("strategy = global\nglobal_order = 1\nglobal_offset = 2\n");
    const auto cfg = tap::ExperimentConfig::from_key_values(kv);
    const auto strategy = cfg.make_strategy();
    const auto* global = std::get_if<tap::GlobalStrategy>(&strategy);
    REQUIRE(global != nullptr);
    CHECK(global->spec.taylor().order == 1);
    CHECK(global->spec.taylor().horizon_offset == 2);
}
