#pragma once

// Closed-form predictions for the two-level (step-feedback) model: effective
// potential branches, critical detunings, energy loss per half period of the
// mode function, the velocity-independent stopping force, and feasibility
// estimates for the feedback loop itself.
//
// All mechanical outputs are dimensionless: energies per m kappa^2 Lambda^2,
// forces per m kappa^2 Lambda.

#include <cmath>
#include <stdexcept>
#include <utility>

#include "bicavity/core.hpp"

namespace bicavity {

struct NoBistabilityError : std::domain_error {
    using std::domain_error::domain_error;
};

namespace detail {

inline FeedbackCurve require_step(const FeedbackCurve& curve) {
    if (curve.kind == FeedbackKind::Step) return curve;
    if (curve.kind == FeedbackKind::Smooth)
        // Two-level equivalent of a sigmoid: its plateaus and switch point.
        return FeedbackCurve::step(1.0 - 0.5 * curve.delta_i_rel, 1.0 + 0.5 * curve.delta_i_rel,
                                   curve.i_sw_rel);
    throw std::domain_error("step-model analytics require a step or smooth feedback curve");
}

}  // namespace detail

// Critical detunings Delta_{1,2}/kappa at which the steady-state line touches
// the step curve: (Delta_n/kappa)^2 = (4 i_n - i_sw) / i_sw.
inline std::pair<double, double> critical_detunings(const FeedbackCurve& curve_in) {
    const FeedbackCurve curve = detail::require_step(curve_in);
    if (4.0 * curve.i1_rel < curve.i_sw_rel)
        throw NoBistabilityError(
            "critical_detunings: 4*i1_rel < i_sw_rel, the low input never reaches the "
            "switching threshold");
    const double d1 = std::sqrt((4.0 * curve.i1_rel - curve.i_sw_rel) / curve.i_sw_rel);
    const double d2 = std::sqrt((4.0 * curve.i2_rel - curve.i_sw_rel) / curve.i_sw_rel);
    return {d1, d2};
}

// Effective potential branch W_n / (m kappa^2 Lambda^2) felt by the particle
// while the input sits on level n of the step model:
//   w_n(xi) = (4 eps i_n / u0) * arctan(dhat(xi)),
// whose negative gradient reproduces the force -8 pi eps J_n sin(4 pi xi)
// with J_n = i_n / (1 + dhat^2).
inline double effective_potential(double xi, int branch_n, const CavityParams& params,
                                  const FeedbackCurve& curve_in) {
    if (params.u0 == 0.0)
        throw std::domain_error("effective_potential: undefined for u0 = 0 (no modulation)");
    if (branch_n != 1 && branch_n != 2)
        throw std::domain_error("effective_potential: branch must be 1 or 2");
    const FeedbackCurve curve = detail::require_step(curve_in);
    const double i_n = (branch_n == 1) ? curve.i1_rel : curve.i2_rel;
    return 4.0 * params.epsilon * i_n / params.u0 *
           std::atan(effective_detuning(xi, params));
}

// Energy loss per half period of the mode function,
//   dE = -(4 eps (i2-i1) / u0) [arctan(D2) - arctan(D1)],
// negative for cooling-sign configurations.
inline double energy_loss_half_period(const CavityParams& params, const FeedbackCurve& curve_in) {
    if (params.u0 == 0.0)
        throw std::domain_error("energy_loss_half_period: undefined for u0 = 0");
    const FeedbackCurve curve = detail::require_step(curve_in);
    const auto [d1, d2] = critical_detunings(curve);
    return -4.0 * params.epsilon * (curve.i2_rel - curve.i1_rel) / params.u0 *
           (std::atan(d2) - std::atan(d1));
}

// Average stopping force F/(m kappa^2 Lambda) = 2 dE (two half periods of the
// mode function per unit xi).
inline double stopping_force(const CavityParams& params, const FeedbackCurve& curve) {
    return 2.0 * energy_loss_half_period(params, curve);
}

// Small-coupling limit (|u0| << 1, delta_c = kappa, switching tuned to
// antinode/node): F/(m kappa^2 Lambda) = -4 eps u0.
inline double stopping_force_small_coupling(const CavityParams& params) {
    return -4.0 * params.epsilon * params.u0;
}

// Range of |dhat| swept by a particle traversing the mode function.
inline std::pair<double, double> swept_detuning_range(const CavityParams& params) {
    const double a = params.delta_c - params.u0;  // antinode
    const double b = params.delta_c;              // node
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (lo <= 0.0 && hi >= 0.0) return {0.0, std::max(std::abs(lo), std::abs(hi))};
    return {std::min(std::abs(lo), std::abs(hi)), std::max(std::abs(lo), std::abs(hi))};
}

struct StepModelReport {
    double delta1_hat = 0.0;
    double delta2_hat = 0.0;
    double de_dimless = 0.0;      // energy loss per half period, / (m kappa^2 Lambda^2)
    double f_stop_dimless = 0.0;  // 2 * de, / (m kappa^2 Lambda)
    bool reachable = false;       // both critical detunings inside the swept |dhat| range
};

inline StepModelReport step_model_report(const CavityParams& params,
                                         const FeedbackCurve& curve) {
    StepModelReport rep;
    const auto [d1, d2] = critical_detunings(curve);
    rep.delta1_hat = d1;
    rep.delta2_hat = d2;
    rep.de_dimless = energy_loss_half_period(params, curve);
    rep.f_stop_dimless = 2.0 * rep.de_dimless;
    const auto [lo, hi] = swept_detuning_range(params);
    rep.reachable = (d1 >= lo && d1 <= hi && d2 >= lo && d2 <= hi);
    return rep;
}

// Depth of one optical-potential well on input level i_level, and the
// corresponding escape velocity sqrt(2 * depth).
inline double well_depth(const CavityParams& params, double i_level) {
    if (params.u0 == 0.0) return 0.0;
    const double w_node = 4.0 * params.epsilon * i_level / params.u0 * std::atan(params.delta_c);
    const double w_anti =
        4.0 * params.epsilon * i_level / params.u0 * std::atan(params.delta_c - params.u0);
    return std::abs(w_node - w_anti);
}

inline double well_escape_velocity(const CavityParams& params, double i_level) {
    return std::sqrt(2.0 * well_depth(params, i_level));
}

struct FeasibilityReport {
    double t_m = 0.0;                // shot-noise-limited measurement time, s
    double displacement_ratio = 0.0; // particle displacement / potential period
    double v_max = 0.0;              // velocity bound from the switching time, m/s
};

// Shot-noise bound t_m > (I0/dI)^2 hbar omega / P0 and the displacement
// budget it implies.  `potential_period` is the spatial period of the optical
// potential (Lambda/2 for a cos^2 mode function).
inline FeasibilityReport feedback_feasibility(double delta_i_rel, double photon_energy,
                                              double mean_power, double velocity,
                                              double potential_period, double switch_time,
                                              double ratio_threshold = 0.1) {
    if (delta_i_rel <= 0.0 || photon_energy <= 0.0 || mean_power <= 0.0 ||
        potential_period <= 0.0 || switch_time <= 0.0 || velocity <= 0.0)
        throw std::domain_error("feedback_feasibility: all inputs must be > 0");
    FeasibilityReport rep;
    rep.t_m = (1.0 / delta_i_rel) * (1.0 / delta_i_rel) * photon_energy / mean_power;
    rep.displacement_ratio = velocity * std::max(rep.t_m, switch_time) / potential_period;
    rep.v_max = ratio_threshold * potential_period / switch_time;
    return rep;
}

}  // namespace bicavity
