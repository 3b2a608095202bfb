#include <doctest.h>

#include <cmath>
#include <random>

#include "fsfm/error.hpp"
#include "fsfm/retention.hpp"

using namespace fsfm;

namespace {

const std::vector<ReinforcementEvent> kStaircase = {{2, 0.95}, {5, 0.90}, {10, 0.85}};

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected fsfm::Error");
    return ErrorCode::IoFailure;
}

}  // namespace

TEST_SUITE("retention") {

TEST_CASE("classical curve") {
    CHECK(retention(0.0, 0.3) == 1.0);
    CHECK(retention(5.0, 0.2) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
    CHECK(retention(17.0, 0.25) == doctest::Approx(0.014264233908999256).epsilon(1e-15));
    CHECK(code_of([] { retention(-1.0, 0.1); }) == ErrorCode::NegativeTime);
    CHECK(code_of([] { retention(1.0, 0.0); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("extended curve") {
    ReinforcementSignal s;
    s.emotional_valence = 0.2;
    s.contextual_relevance = 0.4;
    const ReinforcementCoefficients k;
    CHECK(reinforcement_factor(s, 2, k) == doctest::Approx(2.045084110520953).epsilon(1e-14));
    CHECK(retention_extended(5.0, 0.2, s, 2, k) == doctest::Approx(0.7523443997270444).epsilon(1e-14));
    // Capped at 1.
    CHECK(retention_extended(0.0, 0.2, s, 2, k) == 1.0);
    s.security_compliance = false;
    CHECK(retention_extended(0.0, 0.2, s, 2, k) == 0.0);
    ReinforcementSignal neutral;
    CHECK(retention_extended(3.0, 0.1, neutral, 0, k) == retention(3.0, 0.1));
}

TEST_CASE("coefficients come from config") {
    PolicyConfig c;
    c.kappa_social = 0.9;
    CHECK(ReinforcementCoefficients::from(c).social == 0.9);
    CHECK(ReinforcementCoefficients::from(c).frequency == 0.5);
}

TEST_CASE("staircase plateaus and decay") {
    CHECK(staircase_value(0.0, 0.1, kStaircase) == 1.0);
    CHECK(staircase_value(2.0, 0.1, kStaircase) == 0.95);
    CHECK(staircase_value(5.0, 0.1, kStaircase) == 0.90);
    CHECK(staircase_value(10.0, 0.1, kStaircase) == 0.85);
    CHECK(staircase_value(5.0 - 1e-9, 0.1, kStaircase) ==
          doctest::Approx(0.95 * std::exp(-0.1 * 3.0)).epsilon(1e-9));
    CHECK(staircase_value(3.0, 0.1, kStaircase) == doctest::Approx(0.8595955471341615).epsilon(1e-15));
    // Steeper low-value curve.
    CHECK(staircase_value(1.0, 0.85, {}) == doctest::Approx(std::exp(-0.85)).epsilon(1e-15));
}

TEST_CASE("simulated trajectory includes event days exactly") {
    const auto traj = simulate_staircase(0.1, kStaircase, 15.0, 0.3);
    int hits = 0;
    for (const auto& s : traj.samples) {
        for (const auto& e : kStaircase) {
            if (s.day == e.at_day) {
                CHECK(s.retention == e.plateau);
                ++hits;
            }
        }
    }
    CHECK(hits == 3);
    CHECK(traj.samples.front().day == 0.0);
    CHECK(traj.samples.back().day == doctest::Approx(15.0));
    for (std::size_t i = 1; i < traj.samples.size(); ++i) CHECK(traj.samples[i].day > traj.samples[i - 1].day);
}

TEST_CASE("trajectory without events is the classical curve") {
    const auto traj = simulate_staircase(0.1, {}, 15.0, 1.0);
    REQUIRE(traj.samples.size() == 16);
    for (const auto& s : traj.samples) CHECK(s.retention == retention(s.day, 0.1));
}

TEST_CASE("trajectory argument errors") {
    CHECK(code_of([] { simulate_staircase(0.1, {{5, 0.9}, {2, 0.95}}, 15, 1); }) == ErrorCode::NonMonotonicEvents);
    CHECK(code_of([] { simulate_staircase(0.1, {{2, 0.9}, {2, 0.95}}, 15, 1); }) == ErrorCode::NonMonotonicEvents);
    CHECK(code_of([] { simulate_staircase(0.1, {}, 15, 0); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { simulate_staircase(0.1, {{2, 1.5}}, 15, 1); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { simulate_staircase(0.1, {}, -1, 1); }) == ErrorCode::NegativeTime);
}

TEST_CASE("property: retention is monotone and bounded") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> t(0.0, 100.0), l(1e-3, 2.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = t(rng), b = t(rng), lambda = l(rng);
        const double ra = retention(a, lambda), rb = retention(b, lambda);
        CHECK(ra > 0.0);
        CHECK(ra <= 1.0);
        if (a < b) CHECK(ra >= rb);
    }
}

}  // TEST_SUITE
