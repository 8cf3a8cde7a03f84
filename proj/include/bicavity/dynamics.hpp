#pragma once

// Time integration of the coupled field-particle system in dimensionless
// form,
//   da/dtau = b(J) - a [1 + gamma_hat(xi) + i (delta_c - U_hat(xi))]
//   du/dtau = -8 pi epsilon J sin(4 pi xi),        J = |a|^2
//   dxi/dtau = u,
// plus an adiabatic-mode integrator that rides the hysteretic steady-state
// branch, trapping detection, and per-half-period energy audits.

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "bicavity/analytics.hpp"
#include "bicavity/core.hpp"
#include "bicavity/integrate.hpp"
#include "bicavity/series.hpp"
#include "bicavity/steady_state.hpp"

namespace bicavity {

enum class SimMode { Full, Adiabatic };

struct SimConfig {
    CavityParams params;
    FeedbackCurve curve;
    ParticleState initial;
    std::optional<std::complex<double>> initial_field;  // nullopt: steady state at xi(0)
    Branch initial_branch = Branch::Upper;
    double dt = 1e-2;
    double t_max = 0.0;
    int record_stride = 1;
    SimMode mode = SimMode::Full;
    int trapping_oscillations = 10;  // well-crossing-free oscillations that count as trapped
};

struct FieldEvent {
    double tau = 0.0;
    double xi = 0.0;
    int direction = 0;  // +1 intensity jumped up, -1 down
    double dj = 0.0;
};

struct TrajectorySummary {
    double slope = 0.0;  // fitted deceleration slope over the linear window
    double window_t0 = 0.0;
    double window_t1 = 0.0;
    double r2 = 0.0;
    std::optional<double> trapped_at;
    double u_final = 0.0;
    std::optional<double> u_half_time;  // first tau with |u| <= |u(0)|/2
    int n_events = 0;
    double energy_drift = 0.0;  // adiabatic no-feedback runs: relative drift of u^2/2 + W
};

struct Trajectory {
    std::vector<double> tau, xi, u, j, input;
    std::vector<int> branch;  // adiabatic mode only: 0 lower, 1 upper
    std::vector<FieldEvent> events;
    bool diverged = false;
    TrajectorySummary summary;
};

// One RK4 step of the full coupled system.  Throws on non-finite state.
inline void step_full(FieldState& field, ParticleState& particle, double dt,
                      const CavityParams& params, const FeedbackCurve& curve) {
    std::array<double, 4> s{field.a.real(), field.a.imag(), particle.u, particle.xi};
    rk4_step<4>(s, dt, [&](const std::array<double, 4>& y, std::array<double, 4>& d) {
        const double c = std::cos(2.0 * kPi * y[3]);
        const double cc = c * c;
        const double dhat = params.delta_c - params.u0 * cc;
        const double one_g = 1.0 + params.gamma0 * cc;
        const double J = y[0] * y[0] + y[1] * y[1];
        const double b = input_amplitude(J, curve);
        d[0] = b - one_g * y[0] + dhat * y[1];
        d[1] = -one_g * y[1] - dhat * y[0];
        d[2] = -8.0 * kPi * params.epsilon * J * std::sin(4.0 * kPi * y[3]);
        d[3] = y[2];
    });
    field.a = {s[0], s[1]};
    particle.u = s[2];
    particle.xi = s[3];
}

namespace detail {

// Steady intensity on a frozen branch at a position; used inside adiabatic
// RK4 substeps so stage evaluations stay smooth within one step.
inline double branch_intensity(double xi, Branch branch, const CavityParams& params,
                               const FeedbackCurve& curve) {
    return branch_intensity_at(effective_detuning(xi, params), scattering_rate(xi, params),
                               branch, curve);
}

inline std::complex<double> steady_amplitude(double xi, double J, const CavityParams& params,
                                             const FeedbackCurve& curve) {
    const double b = input_amplitude(J, curve);
    const std::complex<double> lambda(1.0 + scattering_rate(xi, params),
                                      effective_detuning(xi, params));
    return b / lambda;
}

// Hysteretic counter for intensity switchings in full mode: arms on one input
// plateau, fires when the other is reached.
class SwitchDetector {
  public:
    explicit SwitchDetector(const FeedbackCurve& curve) {
        const double hi = max_input(curve), lo = min_input(curve);
        span_ = hi - lo;
        mid_ = 0.5 * (hi + lo);
    }

    std::optional<int> update(double input) {
        if (span_ <= 0.0) return std::nullopt;
        const double hi_thr = mid_ + 0.25 * span_;
        const double lo_thr = mid_ - 0.25 * span_;
        if (input >= hi_thr) {
            const bool fired = (state_ == -1);
            state_ = 1;
            if (fired) return +1;
        } else if (input <= lo_thr) {
            const bool fired = (state_ == 1);
            state_ = -1;
            if (fired) return -1;
        }
        return std::nullopt;
    }

  private:
    double span_ = 0.0, mid_ = 0.0;
    int state_ = 0;
};

}  // namespace detail

// One adiabatic step: (u, xi) advance under the force of the branch occupied
// at the step start; the hysteresis memory is then updated at the new
// position and may report a jump.
inline AdiabaticStep step_adiabatic(BranchMemory& mem, ParticleState& particle, double dt,
                                    const CavityParams& params, const FeedbackCurve& curve) {
    const Branch frozen = mem.branch;
    std::array<double, 2> s{particle.u, particle.xi};
    rk4_step<2>(s, dt, [&](const std::array<double, 2>& y, std::array<double, 2>& d) {
        const double J = detail::branch_intensity(y[1], frozen, params, curve);
        d[0] = -8.0 * kPi * params.epsilon * J * std::sin(4.0 * kPi * y[1]);
        d[1] = y[0];
    });
    particle.u = s[0];
    particle.xi = s[1];
    return adiabatic_intensity(particle.xi, mem, params, curve);
}

// First tau after which xi stays inside a single potential well (width 0.5)
// for at least `oscillations` consecutive well-crossing-free oscillations
// (two velocity sign changes each).
inline std::optional<double> detect_trapping(const Trajectory& traj, const CavityParams& params,
                                             int oscillations = 10) {
    const std::size_t n = traj.tau.size();
    if (n < 2 || params.epsilon == 0.0) return std::nullopt;
    const double center0 = params.epsilon > 0.0 ? 0.0 : 0.25;  // well minima
    auto well_of = [&](double xi) {
        return static_cast<long long>(std::floor((xi - center0) / 0.5 + 0.5));
    };

    std::size_t last_cross = 0;
    bool any_cross = false;
    long long w = well_of(traj.xi[0]);
    for (std::size_t i = 1; i < n; ++i) {
        const long long wi = well_of(traj.xi[i]);
        if (wi != w) {
            last_cross = i;
            any_cross = true;
            w = wi;
        }
    }
    int flips = 0;
    double last_sign = 0.0;
    double umax = 0.0;
    for (std::size_t i = last_cross; i < n; ++i) {
        const double ui = traj.u[i];
        umax = std::max(umax, std::abs(ui));
        if (ui == 0.0) continue;
        const double s = ui > 0.0 ? 1.0 : -1.0;
        if (last_sign != 0.0 && s != last_sign) ++flips;
        last_sign = s;
    }
    if (flips >= 2 * oscillations) return traj.tau[last_cross];
    if (!any_cross && umax < 1e-14) return traj.tau[0];  // resting in a well
    return std::nullopt;
}

struct EnergyAudit {
    std::vector<double> tau;     // times of half-period boundary crossings
    std::vector<double> dke;     // kinetic-energy change between successive crossings
    bool sufficient = false;     // at least two crossings seen
};

// Kinetic-energy deltas between successive crossings of the potential maxima
// (the half-period boundaries of the optical potential).  Crossing times and
// velocities are linearly interpolated between recorded samples.
inline EnergyAudit energy_audit(const Trajectory& traj, const CavityParams& params) {
    EnergyAudit audit;
    const std::size_t n = traj.tau.size();
    if (n < 2) return audit;
    const double m0 = params.epsilon > 0.0 ? 0.25 : 0.0;  // potential maxima
    auto level = [&](double xi) { return (xi - m0) / 0.5; };

    std::vector<double> ke_at;
    for (std::size_t i = 1; i < n; ++i) {
        const double l0 = level(traj.xi[i - 1]);
        const double l1 = level(traj.xi[i]);
        const long long k0 = static_cast<long long>(std::ceil(std::min(l0, l1)));
        const long long k1 = static_cast<long long>(std::floor(std::max(l0, l1)));
        if (k0 > k1) continue;
        const bool forward = l1 >= l0;
        for (long long k = forward ? k0 : k1; forward ? k <= k1 : k >= k0; forward ? ++k : --k) {
            const double lk = static_cast<double>(k);
            if (l1 == l0) continue;
            const double f = (lk - l0) / (l1 - l0);
            if (f < 0.0 || f > 1.0) continue;
            const double t = traj.tau[i - 1] + f * (traj.tau[i] - traj.tau[i - 1]);
            const double u = traj.u[i - 1] + f * (traj.u[i] - traj.u[i - 1]);
            audit.tau.push_back(t);
            ke_at.push_back(0.5 * u * u);
        }
    }
    if (ke_at.size() >= 2) {
        audit.sufficient = true;
        audit.dke.resize(ke_at.size() - 1);
        for (std::size_t i = 0; i + 1 < ke_at.size(); ++i) audit.dke[i] = ke_at[i + 1] - ke_at[i];
        audit.tau.erase(audit.tau.begin());
    } else {
        audit.tau.clear();
    }
    return audit;
}

// Integrates the configured system until t_max, recording every
// `record_stride` steps, and fills the run summary (linear-window slope fit,
// trapping time, half-speed time, event count).
inline Trajectory simulate(const SimConfig& config) {
    validate(config.params);
    validate(config.curve);
    if (config.dt <= 0.0 || config.t_max <= 0.0 || config.record_stride < 1)
        throw std::domain_error("simulate: dt, t_max must be > 0 and record_stride >= 1");

    Trajectory traj;
    const long long nsteps = static_cast<long long>(std::llround(config.t_max / config.dt));
    traj.tau.reserve(static_cast<std::size_t>(nsteps / config.record_stride) + 2);

    ParticleState particle = config.initial;
    FieldState field;
    BranchMemory mem = branch_memory_at(particle.xi, config.params, config.curve,
                                        config.initial_branch);
    if (config.mode == SimMode::Full) {
        if (config.initial_field)
            field.a = *config.initial_field;
        else
            field.a = detail::steady_amplitude(particle.xi, mem.last_j, config.params,
                                               config.curve);
    }

    detail::SwitchDetector detector(config.curve);
    double current_j = config.mode == SimMode::Full ? field.j() : mem.last_j;
    detector.update(feedback_input(current_j, config.curve));
    double armed_j = current_j;

    auto record = [&](double tau) {
        const double J = config.mode == SimMode::Full ? field.j() : mem.last_j;
        traj.tau.push_back(tau);
        traj.xi.push_back(particle.xi);
        traj.u.push_back(particle.u);
        traj.j.push_back(J);
        traj.input.push_back(feedback_input(J, config.curve));
        if (config.mode == SimMode::Adiabatic)
            traj.branch.push_back(mem.branch == Branch::Upper ? 1 : 0);
        return std::isfinite(particle.xi) && std::isfinite(particle.u) && std::isfinite(J);
    };

    record(0.0);
    for (long long i = 1; i <= nsteps; ++i) {
        if (config.mode == SimMode::Full) {
            step_full(field, particle, config.dt, config.params, config.curve);
            const double J = field.j();
            if (auto dir = detector.update(feedback_input(J, config.curve))) {
                traj.events.push_back({static_cast<double>(i) * config.dt, particle.xi, *dir,
                                       J - armed_j});
                armed_j = J;
            }
        } else {
            const auto st = step_adiabatic(mem, particle, config.dt, config.params, config.curve);
            if (st.jump)
                traj.events.push_back({static_cast<double>(i) * config.dt, st.jump->xi,
                                       st.jump->direction, st.jump->dj});
        }
        if (i % config.record_stride == 0 || i == nsteps) {
            if (!record(static_cast<double>(i) * config.dt)) {
                traj.diverged = true;
                break;
            }
        }
    }

    // Summary.
    auto& sum = traj.summary;
    sum.n_events = static_cast<int>(traj.events.size());
    sum.u_final = traj.u.empty() ? 0.0 : traj.u.back();
    sum.trapped_at = detect_trapping(traj, config.params, config.trapping_oscillations);
    if (!traj.u.empty())
        sum.u_half_time = first_time_below(traj.tau, traj.u, 0.5 * std::abs(traj.u.front()));

    std::size_t fit_end = traj.tau.size();
    if (sum.trapped_at) {
        fit_end = 0;
        while (fit_end < traj.tau.size() && traj.tau[fit_end] < *sum.trapped_at) ++fit_end;
    }
    if (auto w = longest_suffix_linear_window(traj.tau, traj.u, fit_end)) {
        sum.slope = w->fit.slope;
        sum.r2 = w->fit.r2;
        sum.window_t0 = traj.tau[w->begin];
        sum.window_t1 = traj.tau[w->end - 1];
    }

    // Conservation diagnostic for adiabatic runs without feedback.
    if (config.mode == SimMode::Adiabatic && config.curve.kind == FeedbackKind::None &&
        config.params.u0 != 0.0 && !traj.u.empty()) {
        auto energy = [&](double u, double xi) {
            return 0.5 * u * u + 4.0 * config.params.epsilon / config.params.u0 *
                                     std::atan(effective_detuning(xi, config.params));
        };
        const double e0 = energy(traj.u.front(), traj.xi.front());
        double max_dev = 0.0;
        for (std::size_t i = 0; i < traj.u.size(); ++i)
            max_dev = std::max(max_dev, std::abs(energy(traj.u[i], traj.xi[i]) - e0));
        sum.energy_drift = e0 != 0.0 ? max_dev / std::abs(e0) : max_dev;
    }
    return traj;
}

}  // namespace bicavity
