#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "bicavity/rng.hpp"
#include "bicavity/steady_state.hpp"
#include "test_helpers.hpp"

using namespace bicavity;
using Catch::Approx;

TEST_CASE("no-feedback roots are the Lorentzian", "[steady]") {
    const auto none = FeedbackCurve::none();
    auto r1 = steady_roots_at(1.0, 0.0, none);
    REQUIRE(r1.size() == 1);
    CHECK(r1[0].j == Approx(0.5).margin(1e-12));
    CHECK(r1[0].stable);

    auto r0 = steady_roots_at(0.0, 0.0, none);
    REQUIRE(r0.size() == 1);
    CHECK(r0[0].j == Approx(1.0).margin(1e-12));

    auto rg = steady_roots_at(1.0, 0.5, none);
    REQUIRE(rg.size() == 1);
    CHECK(rg[0].j == Approx(1.0 / (1.5 * 1.5 + 1.0)).margin(1e-12));
}

TEST_CASE("a steep sigmoid has a bistable detuning window", "[steady]") {
    // strong-feedback curve quoted on the buildup axis: scan the detuning for
    // triple-root positions
    const auto curve = FeedbackCurve::smooth(0.95, 0.53, 10.0);
    int n_bistable = 0;
    double sample_dhat = -1.0;
    for (int i = 0; i <= 400; ++i) {
        const double dhat = 4.0 * i / 400.0;
        const auto roots = steady_roots_at(dhat, 0.0, curve);
        REQUIRE(roots.size() % 2 == 1);  // odd for generic smooth parameters
        if (roots.size() == 3) {
            ++n_bistable;
            sample_dhat = dhat;
            CHECK(roots[0].stable);
            CHECK_FALSE(roots[1].stable);
            CHECK(roots[2].stable);
        }
    }
    REQUIRE(n_bistable > 0);

    // residuals of all roots at one bistable detuning
    const double denom = 1.0 + sample_dhat * sample_dhat;
    for (const auto& r : steady_roots_at(sample_dhat, 0.0, curve))
        CHECK(std::abs(r.j * denom - feedback_input(r.j, curve)) < 1e-12);
}

TEST_CASE("roots match the dense-scan oracle on random draws", "[steady][property]") {
    SplitMix64 rng(42);
    for (int draw = 0; draw < 100; ++draw) {
        const double dhat = 3.0 * rng.next_double();
        const double di = rng.next_double();
        const double isw = 0.3 + 3.5 * rng.next_double();
        const double a = 1.0 + 60.0 * rng.next_double();
        const bool use_step = (draw % 2 == 1);
        const FeedbackCurve curve =
            use_step ? FeedbackCurve::step(1.0 - 0.45 * di, 1.0 + 0.5 * di, isw)
                     : FeedbackCurve::smooth(di, isw, a);

        auto expected = testutil::brute_force_roots(dhat, 0.0, curve);
        auto got = steady_roots_at(dhat, 0.0, curve);
        // the oracle sees only true roots of the residual; unstable middle
        // roots of smooth curves are among them
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i)
            CHECK(got[i].j == Approx(expected[i]).margin(1e-8));
    }
}

TEST_CASE("step-curve plateau intersections are both stable", "[steady]") {
    const auto curve = FeedbackCurve::step(0.935, 1.065, 2.12);
    // inside the bistable window of the step model
    const double dhat = 0.95;
    const auto roots = steady_roots_at(dhat, 0.0, curve);
    REQUIRE(roots.size() == 2);
    CHECK(roots[0].stable);
    CHECK(roots[1].stable);
    const auto sep = unstable_separator(roots, curve);
    REQUIRE(sep.has_value());
    CHECK(*sep == Approx(2.12 / 4.0));
    CHECK(roots[0].j < *sep);
    CHECK(roots[1].j > *sep);
}

TEST_CASE("classify_stability follows the slope criterion", "[steady]") {
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};
    const auto none = FeedbackCurve::none();
    const auto r = steady_roots(0.1, p, none);
    REQUIRE(r.size() == 1);
    CHECK(classify_stability(r[0].j, 0.1, p, none));
}

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
    return out;
}

CavityParams fig2b_params() { return {0.0, -1.33, 0.0, -5e-5}; }
FeedbackCurve fig2b_curve() { return FeedbackCurve::smooth(0.95, 2.12, 2.5); }

}  // namespace

TEST_CASE("hysteresis trace shows two asymmetric jump pairs per period", "[steady]") {
    const auto params = fig2b_params();
    const auto curve = fig2b_curve();
    const auto grid = linspace(0.0, 1.0, 4096);
    const auto trace = hysteresis_trace(grid, params, curve, Branch::Upper);

    REQUIRE(trace.jumps.size() == 4);  // one up/down pair per half period
    std::vector<double> ups, downs;
    for (const auto& j : trace.jumps)
        (j.direction > 0 ? ups : downs).push_back(j.xi);
    REQUIRE(ups.size() == 2);
    REQUIRE(downs.size() == 2);
    const double spacing = 1.0 / 4095.0;
    for (double xu : ups)
        for (double xd : downs) CHECK(std::abs(xu - xd) > spacing);

    // grid refinement leaves the jump positions in place to < 1e-3 period
    const auto fine = hysteresis_trace(linspace(0.0, 1.0, 8192), params, curve, Branch::Upper);
    REQUIRE(fine.jumps.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::abs(fine.jumps[i].xi - trace.jumps[i].xi) < 1e-3);
}

TEST_CASE("no-feedback trace equals the Lorentzian pointwise", "[steady]") {
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};
    const auto none = FeedbackCurve::none();
    const auto grid = linspace(0.0, 1.0, 512);
    const auto trace = hysteresis_trace(grid, p, none, Branch::Upper);
    CHECK(trace.jumps.empty());
    for (const auto& s : trace.samples) {
        const double dhat = effective_detuning(s.xi, p);
        CHECK(s.j == Approx(1.0 / (1.0 + dhat * dhat)).margin(1e-12));
    }
}

TEST_CASE("reversed sweeps traverse the same jump positions in opposite roles", "[steady]") {
    const auto params = fig2b_params();
    const auto curve = fig2b_curve();
    auto fwd_grid = linspace(0.0, 0.5, 4096);
    auto rev_grid = fwd_grid;
    std::reverse(rev_grid.begin(), rev_grid.end());

    const auto fwd = hysteresis_trace(fwd_grid, params, curve, Branch::Upper);
    const auto rev = hysteresis_trace(rev_grid, params, curve, Branch::Upper);
    REQUIRE(fwd.jumps.size() == 2);
    REQUIRE(rev.jumps.size() == 2);

    // same fold positions, opposite traversal order; match each fold of one
    // sweep against a fold of the other within a coarse tolerance (the folds
    // are crossed from opposite sides, displacing the trigger by one cell)
    for (const auto& jf : fwd.jumps) {
        double best = 1e9;
        for (const auto& jr : rev.jumps) best = std::min(best, std::abs(jf.xi - jr.xi));
        CHECK(best < 2.0e-3);
    }
}

TEST_CASE("branch is continuous away from jumps under grid refinement", "[steady][property]") {
    const auto params = fig2b_params();
    const auto curve = fig2b_curve();
    auto max_step_away_from_jumps = [&](int n) {
        const auto trace = hysteresis_trace(linspace(0.0, 1.0, n), params, curve, Branch::Upper);
        double max_dj = 0.0;
        for (std::size_t i = 1; i < trace.samples.size(); ++i) {
            bool near_jump = false;
            for (const auto& j : trace.jumps)
                if (std::abs(trace.samples[i].xi - j.xi) < 8.0 / n) near_jump = true;
            if (!near_jump)
                max_dj = std::max(max_dj,
                                  std::abs(trace.samples[i].j - trace.samples[i - 1].j));
        }
        return max_dj;
    };
    const double coarse = max_step_away_from_jumps(2048);
    const double fine = max_step_away_from_jumps(4096);
    CHECK(fine < 0.6 * coarse);
}

TEST_CASE("adiabatic tracer rides one branch between folds", "[steady]") {
    // weak-coupling configuration: jumps happen strictly inside (0, 0.25)
    CavityParams p{1.0, 0.1, 0.0, 2.5e-5};
    const auto curve = FeedbackCurve::smooth(0.13, 2.12, 12.5);
    const auto grid = linspace(0.0, 0.5, 8192);
    const auto trace = hysteresis_trace(grid, p, curve, Branch::Upper);
    REQUIRE(trace.jumps.size() == 2);
    CHECK(trace.jumps[0].direction == -1);  // toward the node: intensity drops
    CHECK(trace.jumps[1].direction == +1);  // back toward the antinode: recovery
    CHECK(trace.jumps[0].xi < 0.25);
    CHECK(trace.jumps[1].xi > 0.25);
}
