#pragma once

// Fixed-step classical Runge-Kutta stepper over a flat state vector.  Fixed
// stepping keeps runs bit-reproducible; the field relaxes at unit rate in the
// scaled time, so dt ~ 1e-2 resolves every rate in play.

#include <array>
#include <cstddef>
#include <vector>

namespace bicavity {

template <std::size_t N, typename Rhs>
inline void rk4_step(std::array<double, N>& state, double dt, Rhs&& rhs) {
    std::array<double, N> k1, k2, k3, k4, tmp;
    rhs(state, k1);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = state[i] + dt * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < N; ++i)
        state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Runtime-sized variant for the ensemble (2 field + 2N particle components).
template <typename Rhs>
inline void rk4_step(std::vector<double>& state, std::vector<double>& scratch, double dt,
                     Rhs&& rhs) {
    const std::size_t n = state.size();
    scratch.resize(5 * n);
    double* k1 = scratch.data();
    double* k2 = k1 + n;
    double* k3 = k2 + n;
    double* k4 = k3 + n;
    double* tmp = k4 + n;
    rhs(state.data(), k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + dt * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace bicavity
