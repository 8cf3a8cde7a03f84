#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bicavity/core.hpp"
#include "bicavity/rng.hpp"

using namespace bicavity;
using Catch::Approx;

TEST_CASE("mode shift follows u0 cos^2(2 pi xi)", "[core]") {
    CavityParams p;
    p.u0 = 0.1;
    CHECK(mode_shift(0.0, p) == Approx(0.1).margin(1e-15));
    CHECK(mode_shift(0.25, p) == Approx(0.0).margin(1e-15));
    CHECK(mode_shift(0.125, p) == Approx(0.05).margin(1e-15));
    CHECK(effective_detuning(0.0, CavityParams{1.0, 0.1, 0.0, 1e-6}) == Approx(0.9));
}

TEST_CASE("scattering rate vanishes at nodes and for gamma0 = 0", "[core]") {
    CavityParams p;
    CHECK(scattering_rate(0.0, p) == 0.0);
    p.gamma0 = 0.3;
    CHECK(scattering_rate(0.25, p) == Approx(0.0).margin(1e-15));
    CHECK(scattering_rate(0.0, p) == Approx(0.3).margin(1e-15));
}

TEST_CASE("mode functions are periodic with period 1", "[core]") {
    CavityParams p{0.4, 0.37, 0.21, 1e-6};
    for (int i = 0; i < 1000; ++i) {
        const double xi = -3.0 + 6.0 * i / 999.0;
        CHECK(mode_shift(xi + 1.0, p) == Approx(mode_shift(xi, p)).margin(1e-12));
        CHECK(scattering_rate(xi + 1.0, p) == Approx(scattering_rate(xi, p)).margin(1e-12));
    }
}

TEST_CASE("feedback input at the switching point and in the no-feedback limit", "[core]") {
    auto smooth = FeedbackCurve::smooth(0.13, 0.53, 50.0);
    CHECK(feedback_input(0.53 / 4.0, smooth) == 1.0);  // tanh(0) exactly

    auto flat = FeedbackCurve::smooth(0.0, 0.53, 50.0);
    CHECK(feedback_input(0.0, flat) == 1.0);
    CHECK(feedback_input(0.9, flat) == 1.0);

    // saturated upper plateau
    CHECK(feedback_input(100.0, smooth) == Approx(1.065).margin(1e-12));
}

TEST_CASE("feedback input is monotone and bounded", "[core][property]") {
    SplitMix64 rng(2024);
    for (int draw = 0; draw < 50; ++draw) {
        const double di = rng.next_double();
        const double isw = 0.2 + 3.5 * rng.next_double();
        const double a = 1.0 + 60.0 * rng.next_double();
        const FeedbackCurve curves[2] = {
            FeedbackCurve::smooth(di, isw, a),
            FeedbackCurve::step(1.0 - 0.5 * di + 1e-3, 1.0 + 0.5 * di, isw)};
        for (const auto& c : curves) {
            double prev = feedback_input(0.0, c);
            for (int i = 1; i <= 400; ++i) {
                const double J = 2.0 * i / 400.0;
                const double f = feedback_input(J, c);
                CHECK(f >= prev - 1e-15);
                prev = f;
            }
        }
        const auto& s = curves[0];
        for (int i = 0; i <= 100; ++i) {
            const double f = feedback_input(0.05 * i, s);
            CHECK(f >= 1.0 - 0.5 * di - 1e-15);
            CHECK(f <= 1.0 + 0.5 * di + 1e-15);
        }
    }
}

TEST_CASE("step curve is the stiff-sigmoid limit", "[core][property]") {
    const double di = 0.4, isw = 1.3, a = 1e6;
    auto smooth = FeedbackCurve::smooth(di, isw, a);
    auto step = FeedbackCurve::step(1.0 - 0.5 * di, 1.0 + 0.5 * di, isw);
    for (int i = 0; i <= 2000; ++i) {
        const double J = 0.6 * i / 2000.0;
        if (std::abs(4.0 * J - isw) <= 10.5 / a) continue;
        CHECK(std::abs(feedback_input(J, smooth) - feedback_input(J, step)) < 1e-9);
    }
}

TEST_CASE("dimensionless conversion reproduces the reference scales", "[core]") {
    // transmission needed for kappa = 1.2e8 1/s in a 500 um cavity
    const double T = transmission_for_kappa(1.2e8, 500e-6);
    CHECK(T == Approx(4.0027e-4).epsilon(1e-4));
    CHECK(kappa_from(T, 500e-6) == Approx(1.2e8).epsilon(1e-12));

    PhysicalParams phys;
    phys.mass = 1.443e-25;
    phys.alpha_re = 1e-39;
    phys.alpha_im = 0.0;
    phys.mode_period = 1e-6;
    phys.mirror_transmission = T;
    phys.cavity_length = 500e-6;
    phys.mode_volume = 1e-13;
    phys.angular_frequency = 2.0 * kPi * kSpeedOfLight / 1e-6;
    phys.input_intensity_mean = 1e8;
    phys.optical_wavelength = 1e-6;
    const auto scales = to_dimensionless(phys);
    CHECK(scales.kappa == Approx(1.2e8).epsilon(1e-12));
    CHECK(scales.velocity_scale == Approx(120.0).epsilon(1e-12));
    CHECK(scales.recoil_velocity == Approx(4.592e-3).epsilon(1e-3));
}

TEST_CASE("conversion round-trips to 1e-12 relative", "[core][property]") {
    SplitMix64 rng(7);
    for (int draw = 0; draw < 20; ++draw) {
        PhysicalParams phys;
        phys.mass = 1e-26 * (1.0 + 9.0 * rng.next_double());
        phys.alpha_re = 1e-39 * (0.1 + rng.next_double());
        phys.alpha_im = 1e-41 * rng.next_double();
        phys.mode_period = 1e-6 * (0.5 + rng.next_double());
        phys.mirror_transmission = 1e-4 * (0.5 + rng.next_double());
        phys.cavity_length = 1e-4 * (1.0 + 9.0 * rng.next_double());
        phys.mode_volume = 1e-13 * (0.5 + rng.next_double());
        phys.angular_frequency = 1e15 * (1.0 + rng.next_double());
        phys.input_intensity_mean = 1e7 * (0.5 + rng.next_double());
        const auto scales = to_dimensionless(phys);
        const auto back =
            redimensionalize(scales.params, scales.kappa, phys.cavity_length, phys.mode_volume,
                             phys.angular_frequency, phys.mode_period, phys.mass);
        const auto again = to_dimensionless(back);
        CHECK(again.kappa == Approx(scales.kappa).epsilon(1e-12));
        CHECK(again.params.u0 == Approx(scales.params.u0).epsilon(1e-12));
        CHECK(again.params.gamma0 ==
              Approx(scales.params.gamma0).margin(1e-12 * std::abs(scales.params.u0)));
        CHECK(again.params.epsilon == Approx(scales.params.epsilon).epsilon(1e-12));
    }
}

TEST_CASE("invalid parameters are rejected", "[core]") {
    CavityParams p;
    p.gamma0 = -0.1;
    CHECK_THROWS_AS(validate(p), std::domain_error);
    p.gamma0 = 0.0;
    p.u0 = 1.0;
    p.epsilon = -1.0;
    CHECK_THROWS_AS(validate(p), std::domain_error);

    PhysicalParams phys;
    CHECK_THROWS_AS(to_dimensionless(phys), std::domain_error);

    CHECK_THROWS_AS(validate(FeedbackCurve::step(0.5, 0.4, 1.0)), std::domain_error);
    CHECK_THROWS_AS(validate(FeedbackCurve::smooth(0.5, -1.0, 10.0)), std::domain_error);
}
