#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bicavity/analytics.hpp"
#include "bicavity/steady_state.hpp"

using namespace bicavity;
using Catch::Approx;

TEST_CASE("critical detunings reproduce the closed form", "[analytics]") {
    // boundary: low input just touches the threshold
    auto [d1a, d2a] = critical_detunings(FeedbackCurve::step(0.25, 0.5, 1.0));
    CHECK(d1a == Approx(0.0).margin(1e-15));

    // two-level equivalent of the weak-coupling sigmoid, on its quoted axis
    auto [d1, d2] = critical_detunings(FeedbackCurve::step(0.935, 1.065, 0.53));
    CHECK(d1 == Approx(std::sqrt((4.0 * 0.935 - 0.53) / 0.53)).margin(1e-15));
    CHECK(d2 == Approx(std::sqrt((4.0 * 1.065 - 0.53) / 0.53)).margin(1e-15));
    CHECK(d1 == Approx(2.4612).epsilon(1e-4));
    CHECK(d2 == Approx(2.6528).epsilon(1e-4));

    // degenerate two-level curve: equal detunings, zero energy loss
    auto [e1, e2] = critical_detunings(FeedbackCurve::step(1.0, 1.0, 2.0));
    CHECK(e1 == e2);
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};
    CHECK(energy_loss_half_period(p, FeedbackCurve::step(1.0, 1.0, 2.0)) == Approx(0.0));
}

TEST_CASE("tangency: the branch root sits on the step threshold at the critical detuning",
          "[analytics]") {
    const auto curve = FeedbackCurve::step(0.935, 1.065, 2.12);
    auto [d1, d2] = critical_detunings(curve);
    const double j1 = curve.i1_rel / (1.0 + d1 * d1);
    const double j2 = curve.i2_rel / (1.0 + d2 * d2);
    CHECK(std::abs(4.0 * j1 - curve.i_sw_rel) < 1e-10);
    CHECK(std::abs(4.0 * j2 - curve.i_sw_rel) < 1e-10);
}

TEST_CASE("no bistability when the low input cannot reach the threshold", "[analytics]") {
    CHECK_THROWS_AS(critical_detunings(FeedbackCurve::step(0.2, 1.2, 1.0)), NoBistabilityError);
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};
    CHECK_THROWS_AS(energy_loss_half_period(p, FeedbackCurve::step(0.2, 1.2, 1.0)),
                    NoBistabilityError);
}

TEST_CASE("effective potential gradient reproduces the step-model force", "[analytics][property]") {
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};
    const auto curve = FeedbackCurve::step(0.935, 1.065, 2.12);
    const double h = 1e-6;
    for (int n = 1; n <= 2; ++n) {
        const double i_n = n == 1 ? curve.i1_rel : curve.i2_rel;
        for (int k = 1; k < 50; ++k) {
            const double xi = 0.5 * k / 50.0;
            const double grad = (effective_potential(xi + h, n, p, curve) -
                                 effective_potential(xi - h, n, p, curve)) /
                                (2.0 * h);
            const double dhat = effective_detuning(xi, p);
            const double force =
                -8.0 * kPi * p.epsilon * (i_n / (1.0 + dhat * dhat)) * std::sin(4.0 * kPi * xi);
            if (std::abs(force) < 1e-12) continue;  // force node
            CHECK(-grad == Approx(force).epsilon(1e-6));
        }
    }
}

TEST_CASE("potential wells sit at the antinode for a high-field seeker", "[analytics]") {
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};  // delta_c > u0 > 0
    const auto curve = FeedbackCurve::step(0.935, 1.065, 2.12);
    for (int n = 1; n <= 2; ++n)
        CHECK(effective_potential(0.0, n, p, curve) < effective_potential(0.25, n, p, curve));
    CHECK_THROWS_AS(effective_potential(0.1, 1, CavityParams{1.0, 0.0, 0.0, 0.0}, curve),
                    std::domain_error);
}

TEST_CASE("stopping force is exactly twice the half-period energy loss", "[analytics]") {
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};
    const auto curve = FeedbackCurve::step(0.97, 1.03, 2.1);
    const double de = energy_loss_half_period(p, curve);
    CHECK(stopping_force(p, curve) == Approx(2.0 * de).margin(1e-15 * std::abs(de)));
    CHECK(de < 0.0);  // cooling-sign configuration
}

TEST_CASE("small-coupling limit matches the tuned general formula", "[analytics][property]") {
    // switching placed exactly at antinode and node: D1 = 1-u0, D2 = 1, with
    // the mean input normalized to one
    for (double u0 : {0.05, 0.02, 0.01}) {
        CavityParams p{1.0, u0, 0.0, 2.5e-5};
        const double isw = 8.0 / (3.0 + (1.0 - u0) * (1.0 - u0));
        const double i1 = isw * (1.0 + (1.0 - u0) * (1.0 - u0)) / 4.0;
        const double i2 = isw / 2.0;
        const auto curve = FeedbackCurve::step(i1, i2, isw);
        auto [d1, d2] = critical_detunings(curve);
        CHECK(d1 == Approx(1.0 - u0).margin(1e-12));
        CHECK(d2 == Approx(1.0).margin(1e-12));

        const double general = stopping_force(p, curve);
        const double limit = stopping_force_small_coupling(p);
        CHECK(general / limit == Approx(1.0).margin(0.2));
        if (u0 == 0.01) CHECK(general / limit == Approx(1.0).margin(0.02));
    }
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};
    CHECK(std::abs(stopping_force_small_coupling(p)) == Approx(1.0e-5).margin(1e-20));
}

TEST_CASE("flipping polarizability and detuning signs together changes nothing", "[analytics]") {
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};
    CavityParams flipped{-1.0, -0.1, 0.0, -2.5e-5};
    const auto curve = FeedbackCurve::step(0.97, 1.03, 2.1);
    CHECK(energy_loss_half_period(flipped, curve) ==
          Approx(energy_loss_half_period(p, curve)).epsilon(1e-15));
    CHECK(stopping_force_small_coupling(flipped) ==
          Approx(stopping_force_small_coupling(p)).epsilon(1e-15));
}

TEST_CASE("reachability flag compares critical detunings with the swept range", "[analytics]") {
    // weak-coupling two-level equivalent: folds just outside the swept range
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};
    const auto rep = step_model_report(p, FeedbackCurve::step(0.935, 1.065, 2.12));
    CHECK(rep.delta1_hat == Approx(0.874157).epsilon(1e-4));
    CHECK(rep.delta2_hat == Approx(1.004706).epsilon(1e-4));
    CHECK_FALSE(rep.reachable);

    // a curve tuned to switch inside the swept range
    CavityParams p2{1.01, 0.15, 0.0, 2.5e-5};
    const double isw = 8.0 / (2.0 + 0.92 * 0.92 + 0.98 * 0.98);
    const auto tuned = FeedbackCurve::step(isw * (1.0 + 0.92 * 0.92) / 4.0,
                                           isw * (1.0 + 0.98 * 0.98) / 4.0, isw);
    const auto rep2 = step_model_report(p2, tuned);
    CHECK(rep2.reachable);
    CHECK(rep2.f_stop_dimless == Approx(2.0 * rep2.de_dimless));
}

TEST_CASE("feasibility numbers", "[analytics]") {
    // 1 ns switching over a 0.5 um potential period bounds the speed at 50 m/s
    const auto rep = feedback_feasibility(0.13, 1.99e-19, 5e-9, 11.48, 0.5e-6, 1e-9);
    CHECK(rep.v_max == Approx(50.0).epsilon(1e-12));
    CHECK(rep.t_m == Approx(2.355e-9).epsilon(1e-3));
    CHECK(rep.displacement_ratio == Approx(11.48 * rep.t_m / 0.5e-6).epsilon(1e-12));

    // a deeper modulation needs less measurement time
    const auto deep = feedback_feasibility(0.5, 1.99e-19, 5e-9, 11.48, 0.5e-6, 1e-9);
    CHECK(deep.t_m < rep.t_m);
    CHECK_THROWS_AS(feedback_feasibility(0.0, 1.0, 1.0, 1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("well escape velocity from the upper input level", "[analytics]") {
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};
    const double depth = well_depth(p, 1.065);
    CHECK(depth ==
          Approx(4.0 * 2.5e-5 * 1.065 / 0.1 * (std::atan(1.0) - std::atan(0.9))).epsilon(1e-12));
    CHECK(well_escape_velocity(p, 1.065) == Approx(std::sqrt(2.0 * depth)));
}
