#include <doctest.h>

#include <cmath>
#include <vector>

#include "lid/errors.hpp"
#include "lid/schedule.hpp"

using lid::Schedule;
using lid::ScheduleKind;

namespace {

std::vector<Schedule> all_families() { return {Schedule::vp(), Schedule::sub_vp(), Schedule::ve()}; }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("psi examples")
{
    const auto vp = Schedule::vp(0.1, 20.1);
    CHECK(vp.psi(0.0) == 1.0);
    CHECK(vp.psi(1.0) == doctest::Approx(std::exp(-5.05)).epsilon(1e-12));
    CHECK(vp.psi(1.0) == doctest::Approx(6.41e-3).epsilon(1e-3));
    CHECK(Schedule::ve(0.01, 50).psi(0.5) == 1.0);
    CHECK_THROWS_AS(vp.psi(1.5), lid::ValidationError);
    CHECK_THROWS_AS(vp.psi(-0.1), lid::ValidationError);
}

TEST_CASE("sigma2 examples")
{
    const auto vp = Schedule::vp(0.1, 20.1);
    CHECK(vp.sigma2(0.0) == 0.0);
    // 0.1 t + 10 t^2 = ln 2
    const double t_half = (-0.1 + std::sqrt(0.01 + 40.0 * std::log(2.0))) / 20.0;
    CHECK(t_half == doctest::Approx(0.25827).epsilon(1e-4));
    CHECK(vp.sigma2(t_half) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(vp.sigma2(1.0) == doctest::Approx(1.0 - std::exp(-10.1)).epsilon(1e-12));
    CHECK(vp.sigma2(1.0) == doctest::Approx(0.999959).epsilon(1e-6));
    CHECK_THROWS_AS(vp.sigma2(2.0), lid::ValidationError);

    const auto sub = Schedule::sub_vp(0.1, 20.1);
    const double v = 1.0 - std::exp(-sub.integrated_beta(0.3));
    CHECK(sub.sigma2(0.3) == doctest::Approx(v * v).epsilon(1e-12));
    // VE: sigma(0) is sigma_min.
    CHECK(Schedule::ve(0.01, 50).sigma(0.0) == doctest::Approx(0.01));
}

TEST_CASE("t_of_delta examples")
{
    const auto vp = Schedule::vp(0.1, 20.1);
    CHECK(vp.t_of_delta(0.0) == doctest::Approx(0.25827).epsilon(1e-4));
    CHECK(vp.t_of_delta(0.0) == doctest::Approx(vp.t_of_delta_bisect(0.0)).epsilon(1e-10));
    CHECK(Schedule::ve(0.01, 50).t_of_delta(std::log(0.01)) == doctest::Approx(0.0));
    CHECK(vp.t_of_delta(-30.0) < 1e-20);
    CHECK(vp.t_of_delta(-300.0) < 1e-200);

    SUBCASE("out of range reports the interval")
    {
        CHECK_THROWS_AS(vp.t_of_delta(vp.delta_upper() + 1.0), lid::ValidationError);
        CHECK_THROWS_AS(Schedule::ve(0.01, 50).t_of_delta(std::log(0.005)), lid::ValidationError);
        try {
            vp.t_of_delta(100.0);
        } catch (const lid::ValidationError& e) {
            CHECK(std::string(e.what()).find("admissible interval") != std::string::npos);
        }
    }
}

TEST_CASE("drift_diffusion examples")
{
    const auto vp = Schedule::vp(0.1, 20.1);
    auto c = vp.drift_diffusion(0.0);
    CHECK(c.drift == doctest::Approx(-0.05));
    CHECK(c.diffusion2 == doctest::Approx(0.1));
    for (double t : {0.0, 0.3, 1.0}) CHECK(Schedule::ve(0.01, 50).drift_diffusion(t).drift == 0.0);
    const auto sub = Schedule::sub_vp(0.1, 20.1);
    CHECK(sub.drift_diffusion(1.0).diffusion2 == doctest::Approx(20.1 * (1.0 - std::exp(-20.2))).epsilon(1e-12));
    CHECK(sub.drift_diffusion(1.0).diffusion2 == doctest::Approx(20.1).epsilon(1e-8));
}

TEST_CASE("invariants: psi(0), sigma(0), monotone lambda, positive beta")
{
    for (const auto& s : all_families()) {
        CAPTURE(lid::to_string(s.kind()));
        CHECK(s.psi(0.0) == 1.0);
        if (s.kind() != ScheduleKind::VE) {
            CHECK(s.sigma2(0.0) == 0.0);
            for (int i = 0; i <= 100; ++i) CHECK(s.beta(i / 100.0) > 0.0);
        }
        double prev = -INFINITY;
        for (int i = 1; i <= 1000; ++i) {
            const double ll = s.log_lambda(i / 1000.0);
            CHECK(ll > prev);
            prev = ll;
        }
    }
}

TEST_CASE("round trip t_of_delta(log lambda(t)) on a log-spaced grid")
{
    for (const auto& s : all_families()) {
        CAPTURE(lid::to_string(s.kind()));
        double worst = 0.0, worst_bisect = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double t = std::pow(10.0, -4.0 + 4.0 * i / 199.0);
            const double d = s.log_lambda(t);
            worst = std::max(worst, std::abs(s.t_of_delta(d) - t));
            worst_bisect = std::max(worst_bisect, std::abs(s.t_of_delta_bisect(d) - t));
        }
        CHECK(worst < 1e-10);
        CHECK(worst_bisect < 1e-10);
    }
}

TEST_CASE("kernel consistency: psi' = b psi and (sigma^2)' = 2 b sigma^2 + g^2")
{
    const double h = 1e-5;
    for (const auto& s : all_families()) {
        CAPTURE(lid::to_string(s.kind()));
        for (int i = 1; i <= 200; ++i) {
            const double t = i / 201.0;
            const auto [b, g2] = s.drift_diffusion(t);
            const double dpsi = (s.psi(t + h) - s.psi(t - h)) / (2 * h);
            const double dvar = (s.sigma2(t + h) - s.sigma2(t - h)) / (2 * h);
            // psi' - b psi = 0: compare against the scale of either term.
            CHECK(std::abs(dpsi - b * s.psi(t)) <= 1e-4 * std::max(std::abs(b * s.psi(t)), 1e-12) + 1e-12);
            CHECK(rel_err(dvar, 2 * b * s.sigma2(t) + g2) < 1e-4);
        }
    }
}

TEST_CASE("lambda g^2 / (2 lambda') = sigma^2")
{
    const double h = 1e-5;
    for (const auto& s : all_families()) {
        CAPTURE(lid::to_string(s.kind()));
        for (int i = 1; i <= 200; ++i) {
            const double t = i / 201.0;
            const double dlam = (s.lambda(t + h) - s.lambda(t - h)) / (2 * h);
            const double lhs = s.lambda(t) * s.drift_diffusion(t).diffusion2 / (2 * dlam);
            CHECK(rel_err(lhs, s.sigma2(t)) < 1e-4);
        }
    }
}

TEST_CASE("schedule parameter validation")
{
    CHECK_THROWS_AS(Schedule::vp(-1.0, 20.0), lid::ValidationError);
    CHECK_THROWS_AS(Schedule::ve(1.0, 0.5), lid::ValidationError);
    CHECK_THROWS_AS(Schedule::ve().beta(0.5), lid::ValidationError);
    CHECK(lid::schedule_kind_from_string("subvp") == ScheduleKind::SubVP);
    CHECK_THROWS_AS(lid::schedule_kind_from_string("cosine"), lid::ValidationError);
}
