#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "voldiff/schedule.hpp"

using namespace voldiff;

namespace {
double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }
}  // namespace

// Reference values computed with a 60-digit decimal recurrence over the
// default schedule (T = 1000, warmup 300, beta 5e-5 -> 1e-2).
TEST_CASE("default schedule matches high-precision reference") {
    NoiseSchedule s = build_schedule(ScheduleConfig{});
    CHECK(rel(s.alpha_bar[2], 0.9999000025) < 1e-13);
    CHECK(rel(s.lambda1[2], 0.4999999998437421871826) < 1e-13);
    CHECK(rel(s.lambda2[2], 0.4999999998437421871826) < 1e-13);
    CHECK(rel(s.alpha_bar[300], 0.9851115701738402195846) < 1e-13);
    CHECK(rel(s.lambda1[300], 0.003333302082323095461868) < 1e-13);
    CHECK(rel(s.lambda2[300], 0.9966666044759443002517) < 1e-13);
    CHECK(rel(s.lambda1[301], 0.004262693809338112865663) < 1e-13);
    CHECK(rel(s.alpha_bar[650], 0.4036889114919222482068) < 1e-13);
    CHECK(rel(s.alpha_bar[1000], 0.02874519010378818284837) < 1e-13);
    CHECK(rel(s.lambda1[1000], 0.001754412902959882144103) < 1e-13);
    CHECK(rel(s.lambda2[1000], 0.9946899868107062677642) < 1e-13);
}

TEST_CASE("beta ramp: constant warmup, then linear to beta_high") {
    NoiseSchedule s = build_schedule(ScheduleConfig{});
    for (int t = 1; t <= 300; ++t) CHECK(s.beta[t] == 5e-5);
    CHECK(rel(s.beta[301], 6.421428571428571428571e-5) < 1e-14);
    CHECK(rel(s.beta[650], 0.005025) < 1e-14);
    CHECK(rel(s.beta[1000], 1e-2) < 1e-14);
    for (int t = 302; t <= 1000; ++t) CHECK(s.beta[t] > s.beta[t - 1]);
}

TEST_CASE("t = 1 endpoint is exact") {
    NoiseSchedule s = build_schedule(ScheduleConfig{});
    CHECK(s.lambda1[1] == 1.0);
    CHECK(s.lambda2[1] == 0.0);
    CHECK(s.alpha_bar[0] == 1.0);
    CHECK(s.one_minus_alpha_bar[1] == s.beta[1]);
}

TEST_CASE("alpha_bar recurrence and derived columns") {
    NoiseSchedule s = build_schedule(ScheduleConfig{});
    for (int t = 1; t <= 1000; ++t) {
        CHECK(s.alpha[t] == 1.0 - s.beta[t]);
        CHECK(rel(s.alpha_bar[t], s.alpha_bar[t - 1] * s.alpha[t]) < 1e-14);
        CHECK(rel(s.one_minus_alpha_bar[t], 1.0 - s.alpha_bar[t]) < 1e-11);
        CHECK(s.sigma[t] == std::sqrt(s.beta[t]));
        double l1 = std::sqrt(s.alpha_bar[t - 1]) * s.beta[t] / s.one_minus_alpha_bar[t];
        double l2 = std::sqrt(s.alpha[t]) * s.one_minus_alpha_bar[t - 1] / s.one_minus_alpha_bar[t];
        CHECK(s.lambda1[t] == l1);
        CHECK(s.lambda2[t] == l2);
    }
}

TEST_CASE("lambda1 + lambda2 stays just below 1 past t = 1") {
    NoiseSchedule s = build_schedule(ScheduleConfig{});
    for (int t = 2; t <= 1000; ++t) {
        double sum = s.lambda1[t] + s.lambda2[t];
        CHECK(sum < 1.0);
        // the deficit grows with beta: ~9.3e-8 at t = 300, ~3.6e-3 by t = 1000
        CHECK(sum > (t <= 300 ? 1.0 - 1e-6 : 1.0 - 1e-2));
    }
    // reference gaps (exact arithmetic)
    CHECK(1.0 - (s.lambda1[300] + s.lambda2[300]) == doctest::Approx(9.344173260428647e-8).epsilon(1e-6));
    CHECK(1.0 - (s.lambda1[1000] + s.lambda2[1000]) == doctest::Approx(3.5556002863338376e-3).epsilon(1e-9));
}

TEST_CASE("lambda1 is non-increasing over the constant-beta range") {
    NoiseSchedule s = build_schedule(ScheduleConfig{});
    for (int t = 2; t <= 300; ++t) CHECK(s.lambda1[t] <= s.lambda1[t - 1]);
}

// The ramp makes beta grow ~28% at t = 301 while 1 - alpha_bar grows ~0.3%,
// so lambda1 bumps upward right after the warmup ends. Pinned so a schedule
// change that smooths this out is noticed.
TEST_CASE("lambda1 bumps upward where the beta ramp starts") {
    NoiseSchedule s = build_schedule(ScheduleConfig{});
    CHECK(s.lambda1[301] > s.lambda1[300]);
    int increases = 0;
    for (int t = 2; t <= 1000; ++t)
        if (s.lambda1[t] > s.lambda1[t - 1]) ++increases;
    CHECK(increases == 42);
}

TEST_CASE("schedule validation") {
    ScheduleConfig bad;
    bad.T = 0;
    CHECK_THROWS_AS(build_schedule(bad), std::invalid_argument);
    bad = ScheduleConfig{};
    bad.warmup_steps = 0;
    CHECK_THROWS_AS(build_schedule(bad), std::invalid_argument);
    bad = ScheduleConfig{};
    bad.warmup_steps = bad.T + 1;
    CHECK_THROWS_AS(build_schedule(bad), std::invalid_argument);
    bad = ScheduleConfig{};
    bad.beta_low = 0.0;
    CHECK_THROWS_AS(build_schedule(bad), std::invalid_argument);
    bad = ScheduleConfig{};
    bad.beta_low = 2e-2;  // above beta_high
    CHECK_THROWS_AS(build_schedule(bad), std::invalid_argument);
    ScheduleConfig all_warmup;
    all_warmup.warmup_steps = all_warmup.T;
    NoiseSchedule s = build_schedule(all_warmup);
    CHECK(s.beta[all_warmup.T] == all_warmup.beta_low);
}

TEST_CASE("run_walk_tau default shape") {
    std::vector<int> tau = run_walk_tau(300, 50, 10);
    REQUIRE(tau.size() == 75);
    CHECK(tau.front() == 1);
    CHECK(tau.back() == 300);
    for (int t = 1; t <= 50; ++t) CHECK(tau[t - 1] == t);
    for (std::size_t k = 50; k + 1 < tau.size(); ++k) CHECK(tau[k + 1] - tau[k] == 10);
    // hand-enumerated oracle
    std::vector<int> expect;
    for (int t = 1; t <= 50; ++t) expect.push_back(t);
    for (int t = 60; t <= 290; t += 10) expect.push_back(t);
    expect.push_back(300);
    CHECK(tau == expect);
}

TEST_CASE("run_walk_tau edge shapes") {
    std::vector<int> full = run_walk_tau(300, 300, 10);
    REQUIRE(full.size() == 300);
    for (int t = 1; t <= 300; ++t) CHECK(full[t - 1] == t);

    // {1} then 11, 21, ..., 291 (29 strided values) then the appended 300
    std::vector<int> sparse = run_walk_tau(300, 1, 10);
    REQUIRE(sparse.size() == 31);
    CHECK(sparse.front() == 1);
    CHECK(sparse[1] == 11);
    CHECK(sparse[29] == 291);
    CHECK(sparse.back() == 300);

    // stride lands exactly on t_c: no duplicate endpoint
    std::vector<int> exact = run_walk_tau(30, 10, 10);
    std::vector<int> expect;
    for (int t = 1; t <= 10; ++t) expect.push_back(t);
    expect.push_back(20);
    expect.push_back(30);
    CHECK(exact == expect);

    CHECK(run_walk_tau(1, 1, 10) == std::vector<int>{1});

    CHECK_THROWS_AS(run_walk_tau(0, 1, 10), std::invalid_argument);
    CHECK_THROWS_AS(run_walk_tau(300, 0, 10), std::invalid_argument);
    CHECK_THROWS_AS(run_walk_tau(300, 301, 10), std::invalid_argument);
    CHECK_THROWS_AS(run_walk_tau(300, 50, 0), std::invalid_argument);
}

TEST_CASE("run_walk_tau is strictly increasing and bounded") {
    for (int tc : {5, 37, 300}) {
        for (int tr = 1; tr <= tc; tr += 3) {
            for (int p : {1, 2, 7, 10, 50}) {
                std::vector<int> tau = run_walk_tau(tc, tr, p);
                REQUIRE(!tau.empty());
                CHECK(tau.front() == 1);
                CHECK(tau.back() == tc);
                for (std::size_t k = 1; k < tau.size(); ++k) CHECK(tau[k] > tau[k - 1]);
            }
        }
    }
}
