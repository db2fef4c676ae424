#include <doctest.h>

#include <cmath>
#include <vector>

#include "tap/predictor_family.hpp"
#include "tap/scenarios.hpp"

namespace {

tap::FeatureTensor scalar(double v) {
    tap::FeatureTensor t(1, 1, 1);
    t.at(0, 0, 0) = v;
    return t;
}

double value(const tap::FeatureTensor& t) { return t.at(0, 0, 0); }

tap::DifferenceStack linear_stack() {
    tap::DifferenceStack stack(3, 5);
    stack.push(0, scalar(50.0));
    stack.push(5, scalar(45.0));
    return stack;
}

tap::DifferenceStack quadratic_stack() {
    tap::DifferenceStack stack(3, 5);
    stack.push(0, scalar(3025.0));
    stack.push(5, scalar(2500.0));
    stack.push(10, scalar(2025.0));
    return stack;
}

// Count of offsets 0, delta, 2*delta, ... enumerated against lambda+1, kept
// independent of the arithmetic in build_family.
int offsets_by_enumeration(int lambda, int delta) {
    int count = 0;
    for (int x = delta; x <= lambda + 1; x += delta) ++count;
    return count;
}

}  // namespace

TEST_CASE("default family has fifteen predictors") {
    tap::FamilyConfig cfg;
    cfg.order_low = 0;
    cfg.order_high = 2;
    cfg.lambda = 4;
    cfg.delta = 1;
    const auto family = tap::build_family(cfg);
    CHECK(family.size() == 15);
    // Deterministic ordering: ascending offset, then ascending order.
    CHECK(family[0].taylor().order == 0);
    CHECK(family[0].taylor().horizon_offset == 0);
    CHECK(family[1].taylor().order == 1);
    CHECK(family[2].taylor().order == 2);
    CHECK(family[3].taylor().horizon_offset == 1);
    CHECK(family[14].taylor().order == 2);
    CHECK(family[14].taylor().horizon_offset == 4);
}

TEST_CASE("singleton family") {
    tap::FamilyConfig cfg;
    cfg.order_low = 2;
    cfg.order_high = 2;
    cfg.lambda = 0;
    cfg.delta = 1;
    const auto family = tap::build_family(cfg);
    REQUIRE(family.size() == 1);
    CHECK(family[0].taylor().order == 2);
    CHECK(family[0].taylor().horizon_offset == 0);
}

TEST_CASE("coarser horizon discretization") {
    tap::FamilyConfig cfg;
    cfg.order_low = 0;
    cfg.order_high = 2;
    cfg.lambda = 4;
    cfg.delta = 2;
    CHECK(tap::build_family(cfg).size() == 6);
}

TEST_CASE("family size matches enumeration oracle on a randomized grid") {
    tap::SeededRng rng(91);
    for (int trial = 0; trial < 50; ++trial) {
        tap::FamilyConfig cfg;
        cfg.order_low = rng.uniform_int(0, 2);
        cfg.order_high = cfg.order_low + rng.uniform_int(0, 3);
        cfg.lambda = rng.uniform_int(0, 8);
        cfg.delta = rng.uniform_int(1, 4);
        const auto family = tap::build_family(cfg);
        const std::size_t expected =
            static_cast<std::size_t>(offsets_by_enumeration(cfg.lambda, cfg.delta)) *
            (cfg.order_high - cfg.order_low + 1);
        CHECK(family.size() == expected);
        for (std::size_t i = 1; i < family.size(); ++i) {
            const auto& prev = family[i - 1].taylor();
            const auto& cur = family[i].taylor();
            const bool ordered = prev.horizon_offset < cur.horizon_offset ||
                                 (prev.horizon_offset == cur.horizon_offset &&
                                  prev.order < cur.order);
            CHECK(ordered);
        }
    }
}

TEST_CASE("invalid family configs are rejected") {
    tap::FamilyConfig cfg;
    cfg.order_low = 2;
    cfg.order_high = 1;
    CHECK_THROWS_AS(tap::build_family(cfg), tap::InvalidConfig);
    cfg = {};
    cfg.delta = 0;
    CHECK_THROWS_AS(tap::build_family(cfg), tap::InvalidConfig);
    cfg = {};
    cfg.include_hermite = true;
    cfg.hermite_order = 2;
    cfg.hermite_window = 2;
    CHECK_THROWS_AS(tap::build_family(cfg), tap::InvalidConfig);
}

TEST_CASE("taylor forecast is exact on a linear trajectory") {
    const auto stack = linear_stack();
    CHECK(value(tap::taylor_predict(stack, 1, 3, 5)) == doctest::Approx(42.0));
}

TEST_CASE("order zero is plain reuse for any horizon") {
    const auto stack = quadratic_stack();
    CHECK(value(tap::taylor_predict(stack, 0, 0, 5)) == 2025.0);
    CHECK(value(tap::taylor_predict(stack, 0, 7, 5)) == 2025.0);
}

TEST_CASE("taylor forecast on the quadratic stack") {
    const auto stack = quadratic_stack();
    // 2025 - 285 + 9: the difference-quotient weights are not Newton-exact
    // on quadratics (truth at s=42 is 1764).
    CHECK(value(tap::taylor_predict(stack, 2, 3, 5)) == doctest::Approx(1749.0));
    CHECK(value(tap::taylor_predict(stack, 1, 3, 5)) == doctest::Approx(1740.0));
}

TEST_CASE("monotone refinement on the quadratic stack") {
    const auto stack = quadratic_stack();
    const double truth = 42.0 * 42.0;
    const double e0 = std::abs(value(tap::taylor_predict(stack, 0, 3, 5)) - truth);
    const double e1 = std::abs(value(tap::taylor_predict(stack, 1, 3, 5)) - truth);
    const double e2 = std::abs(value(tap::taylor_predict(stack, 2, 3, 5)) - truth);
    CHECK(e2 == doctest::Approx(15.0));
    CHECK(e1 == doctest::Approx(24.0));
    CHECK(e0 == doctest::Approx(261.0));
    CHECK(e2 < e1);
    CHECK(e1 < e0);
}

TEST_CASE("taylor orders above twelve are rejected") {
    const auto stack = quadratic_stack();
    CHECK_THROWS_AS(tap::taylor_predict(stack, 13, 1, 5), tap::InvalidConfig);
}

TEST_CASE("linear exactness property for every order >= 1 at k_p = k") {
    tap::SeededRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const double intercept = rng.uniform(-10.0, 10.0);
        const double slope = rng.uniform(-2.0, 2.0);
        const int spacing = rng.uniform_int(1, 8);
        tap::DifferenceStack stack(4, spacing);
        for (int i = 0; i < 4; ++i) {
            const int u = i * spacing;
            stack.push(u, scalar(intercept + slope * u));
        }
        const int k = rng.uniform_int(1, 2 * spacing);
        const double truth = intercept + slope * (stack.newest().step_index + k);
        for (int m = 1; m <= 3; ++m) {
            const double pred = value(tap::taylor_predict(stack, m, k, spacing));
            CHECK(std::abs(pred - truth) <= 1e-9 * std::max(1.0, std::abs(truth)));
        }
    }
}

TEST_CASE("hermite basis values") {
    const auto at0 = tap::hermite_basis(2, 0.0);
    CHECK(at0[0] == 1.0);
    CHECK(at0[1] == 0.0);
    CHECK(at0[2] == -1.0);
    const auto at1 = tap::hermite_basis(2, 1.0);
    CHECK(at1[0] == 1.0);
    CHECK(at1[1] == 1.0);
    CHECK(at1[2] == 0.0);
    const auto at2 = tap::hermite_basis(2, 2.0);
    CHECK(at2[0] == 1.0);
    CHECK(at2[1] == 2.0);
    CHECK(at2[2] == 3.0);
}

TEST_CASE("hermite basis recurrence extends past order two") {
    // He3 = t^3 - 3t
    const auto he = tap::hermite_basis(3, 2.0);
    CHECK(he[3] == doctest::Approx(2.0));
}

TEST_CASE("hermite fit interpolates a quadratic exactly") {
    // Values 1, 0, 1 at steps mapping to normalized times -1, 0, 1.
    std::vector<tap::Snapshot> snaps;
    snaps.push_back({0, scalar(1.0)});
    snaps.push_back({5, scalar(0.0)});
    snaps.push_back({10, scalar(1.0)});
    const auto fit = tap::hermite_fit(snaps, 2, 3);
    CHECK(value(fit.coeff[0]) == doctest::Approx(1.0));
    CHECK(value(fit.coeff[1]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(value(fit.coeff[2]) == doctest::Approx(1.0));
}

TEST_CASE("hermite fit of a constant") {
    std::vector<tap::Snapshot> snaps;
    for (int i = 0; i < 3; ++i) snaps.push_back({i * 4, scalar(7.5)});
    const auto fit = tap::hermite_fit(snaps, 2, 3);
    CHECK(value(fit.coeff[0]) == doctest::Approx(7.5));
    CHECK(value(fit.coeff[1]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(value(fit.coeff[2]) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("overdetermined hermite fit satisfies the normal equations") {
    // Least-squares residuals must be orthogonal to every basis column.
    tap::SeededRng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const int window = 5;
        std::vector<tap::Snapshot> snaps;
        std::vector<double> values;
        for (int j = 0; j < window; ++j) {
            const double v = rng.uniform(-3.0, 3.0);
            values.push_back(v);
            snaps.push_back({j * 3, scalar(v)});
        }
        const auto fit = tap::hermite_fit(snaps, 2, window);
        for (int basis_k = 0; basis_k <= 2; ++basis_k) {
            double dot = 0.0;
            for (int j = 0; j < window; ++j) {
                const double t = fit.normalized_time(snaps[j].step_index);
                const auto he = tap::hermite_basis(2, t);
                double fitted = 0.0;
                for (int a = 0; a <= 2; ++a) fitted += value(fit.coeff[a]) * he[a];
                dot += (values[j] - fitted) * he[basis_k];
            }
            CHECK(std::abs(dot) <= 1e-9);
        }
    }

    // A quadratic stays exact even with extra snapshots in the window.
    std::vector<tap::Snapshot> quad;
    for (int j = 0; j < 5; ++j) {
        const double u = j * 2.0;
        quad.push_back({j * 2, scalar(1.0 + 0.5 * u - 0.25 * u * u)});
    }
    const auto fit = tap::hermite_fit(quad, 2, 5);
    const double target_step = 12.0;
    const double truth = 1.0 + 0.5 * target_step - 0.25 * target_step * target_step;
    const double got =
        value(tap::hermite_predict(fit.coeff, fit.normalized_time(target_step)));
    CHECK(got == doctest::Approx(truth).epsilon(1e-9));
}

TEST_CASE("hermite fit arity and degeneracy checks") {
    std::vector<tap::Snapshot> snaps;
    snaps.push_back({0, scalar(1.0)});
    snaps.push_back({5, scalar(2.0)});
    CHECK_THROWS_AS(tap::hermite_fit(snaps, 2, 2), tap::InsufficientSnapshots);
    CHECK_THROWS_AS(tap::hermite_fit(snaps, 2, 3), tap::InsufficientSnapshots);
    std::vector<tap::Snapshot> degenerate;
    degenerate.push_back({3, scalar(1.0)});
    CHECK_THROWS_AS(tap::hermite_fit(degenerate, 0, 1), tap::SingularSystem);
}

TEST_CASE("hermite prediction closed forms") {
    const std::vector<tap::FeatureTensor> quad = {scalar(1.0), scalar(0.0), scalar(1.0)};
    CHECK(value(tap::hermite_predict(quad, 2.0)) == doctest::Approx(4.0));
    const std::vector<tap::FeatureTensor> constant = {scalar(3.25), scalar(0.0), scalar(0.0)};
    CHECK(value(tap::hermite_predict(constant, -4.0)) == doctest::Approx(3.25));
    const std::vector<tap::FeatureTensor> lin = {scalar(0.0), scalar(1.0), scalar(0.0)};
    CHECK(value(tap::hermite_predict(lin, -1.0)) == doctest::Approx(-1.0));
}

TEST_CASE("hermite quadratic exactness at arbitrary extrapolation targets") {
    tap::SeededRng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = rng.uniform(-1.0, 1.0);
        const double b = rng.uniform(-0.5, 0.5);
        const double c = rng.uniform(-0.05, 0.05);
        const int spacing = rng.uniform_int(2, 6);
        tap::DifferenceStack stack(3, spacing);
        for (int i = 0; i < 3; ++i) {
            const double u = i * spacing;
            stack.push(i * spacing, scalar(a + b * u + c * u * u));
        }
        const int k = rng.uniform_int(1, 2 * spacing);
        const double target = stack.newest().step_index + k;
        const double truth = a + b * target + c * target * target;
        const auto pred =
            tap::predict(tap::PredictorSpec{tap::HermiteSpec{2, 3}}, stack, k, spacing);
        REQUIRE(pred.has_value());
        CHECK(std::abs(value(*pred) - truth) <= 1e-9 * std::max(1.0, std::abs(truth)));
    }
}

TEST_CASE("predict dispatches taylor specs") {
    const auto stack = linear_stack();
    const auto pred =
        tap::predict(tap::PredictorSpec{tap::TaylorSpec{1, 0}}, stack, 3, 5);
    REQUIRE(pred.has_value());
    CHECK(value(*pred) == doctest::Approx(42.0));
}

TEST_CASE("predict at horizon offset equal to k is plain reuse") {
    const auto stack = quadratic_stack();
    const auto pred =
        tap::predict(tap::PredictorSpec{tap::TaylorSpec{0, 3}}, stack, 3, 5);
    REQUIRE(pred.has_value());
    CHECK(value(*pred) == 2025.0);
}

TEST_CASE("specs behind the horizon are inactive") {
    const auto stack = linear_stack();
    const auto pred =
        tap::predict(tap::PredictorSpec{tap::TaylorSpec{1, 4}}, stack, 2, 5);
    CHECK_FALSE(pred.has_value());
}

TEST_CASE("predict propagates insufficient snapshots") {
    const auto stack = linear_stack();  // two snapshots
    CHECK_THROWS_AS(tap::predict(tap::PredictorSpec{tap::TaylorSpec{2, 0}}, stack, 1, 5),
                    tap::InsufficientSnapshots);
    CHECK_THROWS_AS(tap::predict(tap::PredictorSpec{tap::HermiteSpec{2, 3}}, stack, 1, 5),
                    tap::InsufficientSnapshots);
}

TEST_CASE("active family size never exceeds the configured bound") {
    tap::FamilyConfig cfg;
    cfg.order_low = 0;
    cfg.order_high = 2;
    cfg.lambda = 4;
    cfg.delta = 1;
    const auto family = tap::build_family(cfg);
    for (int k = 1; k <= 6; ++k) {
        int active = 0;
        for (const auto& spec : family) {
            if (k - spec.taylor().horizon_offset >= 0) ++active;
        }
        const int expected_offsets = std::min(k + 1, 5);
        CHECK(active == expected_offsets * 3);
        CHECK(active <= 15);
    }
}

TEST_CASE("min_snapshots per spec kind") {
    CHECK(tap::PredictorSpec{tap::TaylorSpec{2, 0}}.min_snapshots() == 3);
    CHECK(tap::PredictorSpec{tap::HermiteSpec{2, 4}}.min_snapshots() == 4);
}
