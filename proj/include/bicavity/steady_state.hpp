#pragma once

// Roots of the feedback-closed steady-state equation
//
//   g(J) = J * ((1+gamma_hat)^2 + dhat^2) - feedback_input(J) = 0,
//
// their stability (slope criterion g'(J) > 0), and the hysteretic adiabatic
// branch followed by a slowly moving particle.

#include <algorithm>
#include <optional>
#include <vector>

#include "bicavity/core.hpp"

namespace bicavity {

struct SteadyRoot {
    double j = 0.0;
    bool stable = true;
};

enum class Branch { Lower, Upper };

inline const char* to_string(Branch b) { return b == Branch::Lower ? "lower" : "upper"; }

namespace detail {

inline double steady_residual(double J, double denom, const FeedbackCurve& curve) {
    return J * denom - feedback_input(J, curve);
}

// g'(J); the step variant is flat away from its discontinuity.
inline double steady_residual_slope(double J, double denom, const FeedbackCurve& curve) {
    return denom - feedback_input_derivative(J, curve);
}

inline double bisect_root(double lo, double hi, double denom, const FeedbackCurve& curve) {
    double flo = steady_residual(lo, denom, curve);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = steady_residual(mid, denom, curve);
        if ((flo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-16) break;
    }
    return 0.5 * (lo + hi);
}

// Scans [jlo, jhi] with `cells` uniform cells and bisects every sign change.
inline void scan_for_roots(double jlo, double jhi, int cells, double denom,
                           const FeedbackCurve& curve, std::vector<double>& out) {
    if (jhi <= jlo || cells < 1) return;
    double prev = steady_residual(jlo, denom, curve);
    double xprev = jlo;
    for (int i = 1; i <= cells; ++i) {
        const double x = jlo + (jhi - jlo) * static_cast<double>(i) / cells;
        const double f = steady_residual(x, denom, curve);
        if (prev == 0.0) {
            out.push_back(xprev);
        } else if ((prev < 0.0) != (f < 0.0)) {
            out.push_back(bisect_root(xprev, x, denom, curve));
        }
        prev = f;
        xprev = x;
    }
    if (prev == 0.0) out.push_back(xprev);
}

}  // namespace detail

// All steady-state roots at a given effective detuning and scattering rate,
// sorted by increasing J.  Smooth curves yield 1 or 3 roots (generic case);
// step curves yield the 1 or 2 valid plateau intersections.
inline std::vector<SteadyRoot> steady_roots_at(double delta_hat, double gamma_hat,
                                               const FeedbackCurve& curve) {
    const double one_g = 1.0 + gamma_hat;
    const double denom = one_g * one_g + delta_hat * delta_hat;
    std::vector<SteadyRoot> roots;

    if (curve.kind == FeedbackKind::None) {
        roots.push_back({1.0 / denom, true});
        return roots;
    }
    if (curve.kind == FeedbackKind::Step) {
        const double j1 = curve.i1_rel / denom;
        const double j2 = curve.i2_rel / denom;
        if (4.0 * j1 < curve.i_sw_rel) roots.push_back({j1, true});
        if (4.0 * j2 >= curve.i_sw_rel) roots.push_back({j2, true});
        return roots;
    }

    // Smooth sigmoid.  Away from the transition window the curve is flat to
    // machine precision, so the outer roots are plateau intersections; only
    // the window needs a dense scan.
    const double jmax = max_input(curve) / denom + 1e-12;
    const double half_width = 20.0 / curve.steepness;  // tanh saturated beyond this
    const double wlo = std::max(0.0, 0.25 * (curve.i_sw_rel - half_width));
    const double whi = std::min(jmax, 0.25 * (curve.i_sw_rel + half_width));

    std::vector<double> found;
    // Low-plateau candidate, refined by a couple of Newton steps.
    {
        double j = min_input(curve) / denom;
        for (int it = 0; it < 4; ++it)
            j -= detail::steady_residual(j, denom, curve) /
                 detail::steady_residual_slope(j, denom, curve);
        if (j >= 0.0 && j < wlo) found.push_back(j);
    }
    {
        double j = max_input(curve) / denom;
        for (int it = 0; it < 4; ++it)
            j -= detail::steady_residual(j, denom, curve) /
                 detail::steady_residual_slope(j, denom, curve);
        if (j > whi && j <= jmax) found.push_back(j);
    }
    if (whi > wlo) detail::scan_for_roots(wlo, whi, 1024, denom, curve, found);
    if (found.empty())  // degenerate curve (tiny steepness etc.): brute scan
        detail::scan_for_roots(0.0, jmax, 4096, denom, curve, found);

    std::sort(found.begin(), found.end());
    for (double j : found) {
        if (!roots.empty() && std::abs(j - roots.back().j) < 1e-11) continue;
        const double slope = detail::steady_residual_slope(j, denom, curve);
        roots.push_back({j, slope > 1e-9});  // marginal counts as unstable
    }
    return roots;
}

inline std::vector<SteadyRoot> steady_roots(double xi, const CavityParams& params,
                                            const FeedbackCurve& curve) {
    return steady_roots_at(effective_detuning(xi, params), scattering_rate(xi, params), curve);
}

// Slope criterion: a root is stable iff the straight line crosses the feedback
// curve from below, g'(J) > 0.  Marginal roots (|g'| < 1e-9) report unstable.
inline bool classify_stability(double root_j, double xi, const CavityParams& params,
                               const FeedbackCurve& curve) {
    const double dhat = effective_detuning(xi, params);
    const double one_g = 1.0 + scattering_rate(xi, params);
    return detail::steady_residual_slope(root_j, one_g * one_g + dhat * dhat, curve) > 1e-9;
}

// The unstable root separating the two stable basins, when bistable.  Step
// curves use the discontinuity itself (J = i_sw/4).
inline std::optional<double> unstable_separator(const std::vector<SteadyRoot>& roots,
                                                const FeedbackCurve& curve) {
    if (curve.kind == FeedbackKind::Step) {
        if (roots.size() == 2) return 0.25 * curve.i_sw_rel;
        return std::nullopt;
    }
    for (const auto& r : roots)
        if (!r.stable) return r.j;
    return std::nullopt;
}

// Steady intensity on a given branch; falls back to the only root where the
// equation is monostable.
inline double branch_intensity_at(double delta_hat, double gamma_hat, Branch branch,
                                  const FeedbackCurve& curve) {
    const auto roots = steady_roots_at(delta_hat, gamma_hat, curve);
    double lo = 0.0, hi = 0.0;
    int nstable = 0;
    for (const auto& r : roots) {
        if (!r.stable) continue;
        if (nstable == 0) {
            lo = hi = r.j;
        } else {
            lo = std::min(lo, r.j);
            hi = std::max(hi, r.j);
        }
        ++nstable;
    }
    if (nstable == 0) return roots.empty() ? 0.0 : roots.front().j;
    return branch == Branch::Lower ? lo : hi;
}

struct JumpEvent {
    double xi = 0.0;
    int direction = 0;  // +1 jump up in J, -1 jump down
    double dj = 0.0;
};

// Which stable branch the adiabatic solution currently occupies.
struct BranchMemory {
    Branch branch = Branch::Upper;
    double last_j = 0.0;
    std::optional<double> last_separator;
};

// Seeds a BranchMemory at a position: picks the requested branch among the
// stable roots there (the only root if the position is monostable).
inline BranchMemory branch_memory_at(double xi, const CavityParams& params,
                                     const FeedbackCurve& curve, Branch initial) {
    const auto roots = steady_roots(xi, params, curve);
    std::vector<double> stable;
    for (const auto& r : roots)
        if (r.stable) stable.push_back(r.j);
    BranchMemory mem;
    mem.branch = initial;
    mem.last_separator = unstable_separator(roots, curve);
    if (stable.empty())
        mem.last_j = roots.empty() ? 0.0 : roots.front().j;
    else
        mem.last_j = (initial == Branch::Lower) ? stable.front() : stable.back();
    if (stable.size() < 2 && !stable.empty() && mem.last_separator)
        mem.branch = (mem.last_j > *mem.last_separator) ? Branch::Upper : Branch::Lower;
    return mem;
}

struct AdiabaticStep {
    double j = 0.0;
    std::optional<JumpEvent> jump;
};

// Advances the hysteresis memory to a new position.  While the occupied
// branch persists (the stable root on the same side of the unstable root as
// last_j), it is followed continuously; when a saddle-node has removed it,
// the solution relaxes to the unique remaining stable root and a jump event
// is emitted.
inline AdiabaticStep adiabatic_intensity_at(double delta_hat, double gamma_hat, double xi,
                                            BranchMemory& mem, const FeedbackCurve& curve) {
    const auto roots = steady_roots_at(delta_hat, gamma_hat, curve);
    std::vector<double> stable;
    for (const auto& r : roots)
        if (r.stable) stable.push_back(r.j);
    const auto sep = unstable_separator(roots, curve);

    AdiabaticStep out;
    if (stable.size() >= 2 && sep) {
        const bool below = (mem.last_j < *sep) ||
                           (mem.last_j == *sep && mem.branch == Branch::Lower);
        out.j = below ? stable.front() : stable.back();
        mem.branch = below ? Branch::Lower : Branch::Upper;
        mem.last_separator = sep;
    } else if (!stable.empty()) {
        const double j = stable.front();
        if (mem.last_separator) {
            const bool was_below = mem.last_j < *mem.last_separator;
            const bool is_below = j < *mem.last_separator;
            if (was_below != is_below) {
                out.jump = JumpEvent{xi, is_below ? -1 : +1, j - mem.last_j};
                mem.last_separator.reset();
            }
        }
        out.j = j;
        if (mem.last_separator)
            mem.branch = (j > *mem.last_separator) ? Branch::Upper : Branch::Lower;
        else
            mem.branch = (out.jump && out.jump->direction > 0) ? Branch::Upper
                         : (out.jump ? Branch::Lower : mem.branch);
    } else {
        out.j = mem.last_j;  // unreachable for valid curves: g(0) < 0 <= g(Jmax)
    }
    mem.last_j = out.j;
    return out;
}

inline AdiabaticStep adiabatic_intensity(double xi, BranchMemory& mem,
                                         const CavityParams& params,
                                         const FeedbackCurve& curve) {
    return adiabatic_intensity_at(effective_detuning(xi, params), scattering_rate(xi, params),
                                  xi, mem, curve);
}

struct HysteresisSample {
    double xi = 0.0;
    double j = 0.0;
    Branch branch = Branch::Upper;
};

struct HysteresisTrace {
    std::vector<HysteresisSample> samples;
    std::vector<JumpEvent> jumps;
};

// Applies the adiabatic tracer along an ordered position grid.
inline HysteresisTrace hysteresis_trace(const std::vector<double>& xi_grid,
                                        const CavityParams& params, const FeedbackCurve& curve,
                                        Branch initial) {
    HysteresisTrace trace;
    if (xi_grid.empty()) return trace;
    BranchMemory mem = branch_memory_at(xi_grid.front(), params, curve, initial);
    trace.samples.push_back({xi_grid.front(), mem.last_j, mem.branch});
    for (std::size_t i = 1; i < xi_grid.size(); ++i) {
        const auto step = adiabatic_intensity(xi_grid[i], mem, params, curve);
        if (step.jump) trace.jumps.push_back(*step.jump);
        trace.samples.push_back({xi_grid[i], step.j, mem.branch});
    }
    return trace;
}

}  // namespace bicavity
