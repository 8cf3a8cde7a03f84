#pragma once

// N particles coupled to one cavity mode through the additive dispersive
// shift U_tot = sum_i u0 cos^2(2 pi xi_i).  Every particle feels the common
// intracavity intensity; the feedback closes over that same intensity.
// Reductions run in fixed particle order, so runs are bit-reproducible.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "bicavity/core.hpp"
#include "bicavity/dynamics.hpp"
#include "bicavity/integrate.hpp"
#include "bicavity/rng.hpp"
#include "bicavity/series.hpp"
#include "bicavity/steady_state.hpp"

namespace bicavity {

struct EnsembleConfig {
    int n = 1;
    std::uint64_t seed = 0;
    double sigma_u = 0.0;  // initial velocity standard deviation, kappa*Lambda units
    CavityParams params;   // per-particle coupling
    FeedbackCurve curve;
    double dt = 1e-2;
    double t_max = 0.0;
    int record_stride = 1;
    SimMode mode = SimMode::Full;
    int snapshot_stride = 0;  // records per per-particle snapshot; 0 = off
};

struct EnsembleState {
    std::vector<double> xi, u;
    FieldState field;   // full mode
    BranchMemory mem;   // adiabatic mode
    double tau = 0.0;
};

struct ParticleSnapshot {
    double tau = 0.0;
    std::vector<double> xi, u;
};

struct EnsembleSummary {
    double var0 = 0.0;
    double var_final = 0.0;  // smoothed
    std::optional<double> half_life;
    int n_jumps = 0;
    double energy_drift = 0.0;  // adiabatic no-feedback diagnostic
};

struct EnsembleTrajectory {
    std::vector<double> tau, variance, mean_ke, j, input;
    std::vector<double> variance_smoothed;
    std::vector<FieldEvent> events;
    std::vector<ParticleSnapshot> snapshots;
    bool diverged = false;
    EnsembleSummary summary;
};

inline double collective_shift(const std::vector<double>& xi, const CavityParams& params) {
    double acc = 0.0;
    for (double x : xi) {
        const double c = std::cos(2.0 * kPi * x);
        acc += params.u0 * c * c;
    }
    return acc;
}

inline double collective_scattering(const std::vector<double>& xi, const CavityParams& params) {
    double acc = 0.0;
    for (double x : xi) {
        const double c = std::cos(2.0 * kPi * x);
        acc += params.gamma0 * c * c;
    }
    return acc;
}

// Positions i.i.d. uniform on [0,1), velocities i.i.d. normal(0, sigma_u^2),
// one SplitMix64 substream per particle; the field starts on the upper stable
// branch of the collective detuning.
inline EnsembleState init_ensemble(const EnsembleConfig& config) {
    if (config.n < 1) throw std::domain_error("init_ensemble: n must be >= 1");
    if (config.sigma_u < 0.0) throw std::domain_error("init_ensemble: sigma_u must be >= 0");
    EnsembleState state;
    state.xi.resize(static_cast<std::size_t>(config.n));
    state.u.resize(static_cast<std::size_t>(config.n));
    for (int i = 0; i < config.n; ++i) {
        auto rng = SplitMix64::stream(config.seed, static_cast<std::uint64_t>(i));
        state.xi[static_cast<std::size_t>(i)] = rng.next_double();
        state.u[static_cast<std::size_t>(i)] = config.sigma_u * rng.next_normal();
    }
    const double dhat = config.params.delta_c - collective_shift(state.xi, config.params);
    const double ghat = collective_scattering(state.xi, config.params);
    state.mem.branch = Branch::Upper;
    state.mem.last_j = branch_intensity_at(dhat, ghat, Branch::Upper, config.curve);
    const double b = input_amplitude(state.mem.last_j, config.curve);
    state.field.a = b / std::complex<double>(1.0 + ghat, dhat);
    return state;
}

namespace detail {

// RHS of the full N-particle system on the flat layout
// [Re a, Im a, u_0..u_{n-1}, xi_0..xi_{n-1}].
inline void ensemble_rhs(const double* y, double* d, int n, const CavityParams& params,
                         const FeedbackCurve& curve) {
    double shift = 0.0, scatter = 0.0;
    for (int i = 0; i < n; ++i) {
        const double c = std::cos(2.0 * kPi * y[2 + n + i]);
        const double cc = c * c;
        shift += params.u0 * cc;
        scatter += params.gamma0 * cc;
    }
    const double dhat = params.delta_c - shift;
    const double one_g = 1.0 + scatter;
    const double J = y[0] * y[0] + y[1] * y[1];
    const double b = input_amplitude(J, curve);
    d[0] = b - one_g * y[0] + dhat * y[1];
    d[1] = -one_g * y[1] - dhat * y[0];
    for (int i = 0; i < n; ++i) {
        d[2 + i] = -8.0 * kPi * params.epsilon * J * std::sin(4.0 * kPi * y[2 + n + i]);
        d[2 + n + i] = y[2 + i];
    }
}

}  // namespace detail

// One RK4 step of the N-particle system (full field dynamics).
inline void step_ensemble(EnsembleState& state, double dt, const CavityParams& params,
                          const FeedbackCurve& curve, std::vector<double>& flat,
                          std::vector<double>& scratch) {
    const int n = static_cast<int>(state.xi.size());
    flat.resize(static_cast<std::size_t>(2 + 2 * n));
    flat[0] = state.field.a.real();
    flat[1] = state.field.a.imag();
    for (int i = 0; i < n; ++i) {
        flat[static_cast<std::size_t>(2 + i)] = state.u[static_cast<std::size_t>(i)];
        flat[static_cast<std::size_t>(2 + n + i)] = state.xi[static_cast<std::size_t>(i)];
    }
    rk4_step(flat, scratch, dt,
             [&](const double* y, double* d) { detail::ensemble_rhs(y, d, n, params, curve); });
    state.field.a = {flat[0], flat[1]};
    for (int i = 0; i < n; ++i) {
        state.u[static_cast<std::size_t>(i)] = flat[static_cast<std::size_t>(2 + i)];
        state.xi[static_cast<std::size_t>(i)] = flat[static_cast<std::size_t>(2 + n + i)];
    }
}

inline void step_ensemble(EnsembleState& state, double dt, const CavityParams& params,
                          const FeedbackCurve& curve) {
    std::vector<double> flat, scratch;
    step_ensemble(state, dt, params, curve, flat, scratch);
}

// Adiabatic variant: the field rides the hysteretic steady branch of the
// collective detuning while the particles move.
inline AdiabaticStep step_ensemble_adiabatic(EnsembleState& state, double dt,
                                             const CavityParams& params,
                                             const FeedbackCurve& curve,
                                             std::vector<double>& flat,
                                             std::vector<double>& scratch) {
    const int n = static_cast<int>(state.xi.size());
    const Branch frozen = state.mem.branch;
    flat.resize(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        flat[static_cast<std::size_t>(i)] = state.u[static_cast<std::size_t>(i)];
        flat[static_cast<std::size_t>(n + i)] = state.xi[static_cast<std::size_t>(i)];
    }
    rk4_step(flat, scratch, dt, [&](const double* y, double* d) {
        double shift = 0.0, scatter = 0.0;
        for (int i = 0; i < n; ++i) {
            const double c = std::cos(2.0 * kPi * y[n + i]);
            shift += params.u0 * c * c;
            scatter += params.gamma0 * c * c;
        }
        const double J =
            branch_intensity_at(params.delta_c - shift, scatter, frozen, curve);
        for (int i = 0; i < n; ++i) {
            d[i] = -8.0 * kPi * params.epsilon * J * std::sin(4.0 * kPi * y[n + i]);
            d[n + i] = y[i];
        }
    });
    for (int i = 0; i < n; ++i) {
        state.u[static_cast<std::size_t>(i)] = flat[static_cast<std::size_t>(i)];
        state.xi[static_cast<std::size_t>(i)] = flat[static_cast<std::size_t>(n + i)];
    }
    const double dhat = params.delta_c - collective_shift(state.xi, params);
    const double ghat = collective_scattering(state.xi, params);
    // mean particle position is only used to tag the jump event
    double mean_xi = 0.0;
    for (double x : state.xi) mean_xi += x;
    mean_xi /= static_cast<double>(n);
    return adiabatic_intensity_at(dhat, ghat, mean_xi, state.mem, curve);
}

// Centered moving average of the variance series; endpoints use the
// truncated window.
inline std::vector<double> variance_series(const EnsembleTrajectory& traj, int window) {
    return moving_average_centered(traj.variance, window);
}

inline int default_smoothing_window(std::size_t samples) {
    int w = static_cast<int>((samples + 99) / 100);  // ~1% of samples
    if (w < 3) w = 3;
    if (w % 2 == 0) ++w;
    return w;
}

inline EnsembleTrajectory simulate_ensemble(const EnsembleConfig& config) {
    validate(config.params);
    validate(config.curve);
    if (config.dt <= 0.0 || config.t_max <= 0.0 || config.record_stride < 1)
        throw std::domain_error("simulate_ensemble: dt, t_max must be > 0, record_stride >= 1");

    EnsembleTrajectory traj;
    EnsembleState state = init_ensemble(config);
    const long long nsteps = static_cast<long long>(std::llround(config.t_max / config.dt));
    const int n = config.n;

    detail::SwitchDetector detector(config.curve);
    double current_j =
        config.mode == SimMode::Full ? state.field.j() : state.mem.last_j;
    detector.update(feedback_input(current_j, config.curve));
    double armed_j = current_j;

    std::vector<double> flat, scratch;
    long long recorded = 0;

    const bool track_energy = config.mode == SimMode::Adiabatic &&
                              config.curve.kind == FeedbackKind::None && config.params.u0 != 0.0;
    auto energy = [&]() {
        double e = 0.0;
        for (double u : state.u) e += 0.5 * u * u;
        const double dhat = config.params.delta_c - collective_shift(state.xi, config.params);
        return e + 4.0 * config.params.epsilon / config.params.u0 * std::atan(dhat);
    };
    const double e0 = track_energy ? energy() : 0.0;
    double max_energy_dev = 0.0;

    auto record = [&](double tau) {
        const double J = config.mode == SimMode::Full ? state.field.j() : state.mem.last_j;
        traj.tau.push_back(tau);
        traj.variance.push_back(variance_population(state.u));
        double ke = 0.0;
        for (double u : state.u) ke += 0.5 * u * u;
        traj.mean_ke.push_back(ke / static_cast<double>(n));
        traj.j.push_back(J);
        traj.input.push_back(feedback_input(J, config.curve));
        if (config.snapshot_stride > 0 && recorded % config.snapshot_stride == 0)
            traj.snapshots.push_back({tau, state.xi, state.u});
        ++recorded;
        bool finite = std::isfinite(J);
        for (double x : state.xi) finite = finite && std::isfinite(x);
        for (double u : state.u) finite = finite && std::isfinite(u);
        return finite;
    };

    record(0.0);
    for (long long i = 1; i <= nsteps; ++i) {
        const double tau = static_cast<double>(i) * config.dt;
        if (config.mode == SimMode::Full) {
            step_ensemble(state, config.dt, config.params, config.curve, flat, scratch);
            const double J = state.field.j();
            if (auto dir = detector.update(feedback_input(J, config.curve))) {
                traj.events.push_back({tau, 0.0, *dir, J - armed_j});
                armed_j = J;
            }
        } else {
            const auto st =
                step_ensemble_adiabatic(state, config.dt, config.params, config.curve, flat,
                                        scratch);
            if (st.jump)
                traj.events.push_back({tau, st.jump->xi, st.jump->direction, st.jump->dj});
        }
        if (i % config.record_stride == 0 || i == nsteps) {
            if (track_energy) max_energy_dev = std::max(max_energy_dev, std::abs(energy() - e0));
            if (!record(tau)) {
                traj.diverged = true;
                break;
            }
        }
    }

    traj.variance_smoothed =
        moving_average_centered(traj.variance, default_smoothing_window(traj.variance.size()));

    auto& sum = traj.summary;
    sum.var0 = traj.variance.empty() ? 0.0 : traj.variance.front();
    sum.var_final = traj.variance_smoothed.empty() ? 0.0 : traj.variance_smoothed.back();
    sum.n_jumps = static_cast<int>(traj.events.size());
    sum.half_life = first_time_below(traj.tau, traj.variance_smoothed, 0.5 * sum.var0);

    if (track_energy) sum.energy_drift = e0 != 0.0 ? max_energy_dev / std::abs(e0) : max_energy_dev;
    return traj;
}

}  // namespace bicavity
