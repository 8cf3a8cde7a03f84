#pragma once

// Dimensionless parameterization of a driven bistable cavity coupled to a
// polarizable point particle, the intensity-feedback curve family, the
// standing-wave mode functions, and the physical <-> dimensionless converter.
//
// Unit scheme used throughout the library:
//   time        tau = kappa * t
//   position    xi  = x / Lambda          (mode function period = 1 in xi)
//   velocity    u   = v / (kappa*Lambda)
//   intensity   J   = T |E|^2 / (4 I0)    (no-feedback steady state: J = 1/(1+dhat^2))
//   input       b, |b|^2 = I_i / I0
// With these scales the force law is du/dtau = -8*pi*epsilon * J * sin(4*pi*xi).

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace bicavity {

inline constexpr double kPi = 3.14159265358979323846;

// Fixed SI constants used by the converter.
inline constexpr double kSpeedOfLight = 2.998e8;    // m/s
inline constexpr double kHbar = 1.0546e-34;         // J s
inline constexpr double kVacuumPermittivity = 8.854e-12;  // F/m

// Dimensionless cavity/coupling constants.
struct CavityParams {
    double delta_c = 0.0;  // cavity detuning, Delta_c / kappa
    double u0 = 0.0;       // maximal particle-induced shift, U0 / kappa
    double gamma0 = 0.0;   // maximal scattering rate, gamma0 / kappa (>= 0)
    double epsilon = 0.0;  // coupling strength Re(alpha) I0 / (kappa^2 Lambda^2 T m)
};

inline void validate(const CavityParams& p) {
    if (p.gamma0 < 0.0)
        throw std::domain_error("CavityParams: gamma0 must be >= 0");
    if (p.u0 * p.epsilon < 0.0)
        throw std::domain_error(
            "CavityParams: u0 and epsilon must carry the same sign (both follow Re(alpha))");
}

enum class FeedbackKind { None, Smooth, Step };

// Input-intensity law I_i(I).  All intensities are relative to the mean input
// I0; the intracavity axis of the curve is T*I/I0 = 4*J.
struct FeedbackCurve {
    FeedbackKind kind = FeedbackKind::None;
    double delta_i_rel = 0.0;  // (I2 - I1)/I0, smooth variant
    double i_sw_rel = 0.0;     // switching point, T*I_sw/I0
    double steepness = 0.0;    // sigmoid steepness a
    double i1_rel = 0.0;       // low plateau, step variant
    double i2_rel = 0.0;       // high plateau, step variant

    static FeedbackCurve none() { return FeedbackCurve{}; }

    static FeedbackCurve smooth(double delta_i_rel, double i_sw_rel, double steepness) {
        FeedbackCurve c;
        c.kind = FeedbackKind::Smooth;
        c.delta_i_rel = delta_i_rel;
        c.i_sw_rel = i_sw_rel;
        c.steepness = steepness;
        return c;
    }

    static FeedbackCurve step(double i1_rel, double i2_rel, double i_sw_rel) {
        FeedbackCurve c;
        c.kind = FeedbackKind::Step;
        c.i1_rel = i1_rel;
        c.i2_rel = i2_rel;
        c.i_sw_rel = i_sw_rel;
        return c;
    }
};

inline void validate(const FeedbackCurve& c) {
    switch (c.kind) {
        case FeedbackKind::None:
            break;
        case FeedbackKind::Smooth:
            if (c.delta_i_rel < 0.0)
                throw std::domain_error("FeedbackCurve: delta_i_rel must be >= 0");
            if (c.i_sw_rel <= 0.0)
                throw std::domain_error("FeedbackCurve: i_sw_rel must be > 0");
            if (c.steepness <= 0.0)
                throw std::domain_error("FeedbackCurve: steepness must be > 0");
            break;
        case FeedbackKind::Step:
            if (c.i1_rel <= 0.0)
                throw std::domain_error("FeedbackCurve: i1_rel must be > 0");
            if (c.i2_rel < c.i1_rel)
                throw std::domain_error("FeedbackCurve: i2_rel must be >= i1_rel");
            if (c.i_sw_rel <= 0.0)
                throw std::domain_error("FeedbackCurve: i_sw_rel must be > 0");
            break;
    }
}

// Particle-induced resonance shift U(xi)/kappa = u0 * cos^2(2 pi xi).
inline double mode_shift(double xi, const CavityParams& p) {
    const double c = std::cos(2.0 * kPi * xi);
    return p.u0 * c * c;
}

// Scattering rate gamma(xi)/kappa = gamma0 * cos^2(2 pi xi).
inline double scattering_rate(double xi, const CavityParams& p) {
    const double c = std::cos(2.0 * kPi * xi);
    return p.gamma0 * c * c;
}

// Effective detuning Delta(xi)/kappa = delta_c - U(xi)/kappa.
inline double effective_detuning(double xi, const CavityParams& p) {
    return p.delta_c - mode_shift(xi, p);
}

// Scaled input intensity I_i/I0 as a function of the scaled intracavity
// intensity J (the curve's intracavity axis is T*I/I0 = 4*J).
inline double feedback_input(double J, const FeedbackCurve& c) {
    switch (c.kind) {
        case FeedbackKind::None:
            return 1.0;
        case FeedbackKind::Smooth:
            return 1.0 + 0.5 * c.delta_i_rel * std::tanh(c.steepness * (4.0 * J - c.i_sw_rel));
        case FeedbackKind::Step:
            return (4.0 * J < c.i_sw_rel) ? c.i1_rel : c.i2_rel;
    }
    return 1.0;
}

// d(feedback_input)/dJ; zero for the constant and step variants.
inline double feedback_input_derivative(double J, const FeedbackCurve& c) {
    if (c.kind != FeedbackKind::Smooth) return 0.0;
    const double th = std::cosh(c.steepness * (4.0 * J - c.i_sw_rel));
    return 2.0 * c.delta_i_rel * c.steepness / (th * th);
}

// Real, positive input amplitude b = sqrt(I_i/I0).
inline double input_amplitude(double J, const FeedbackCurve& c) {
    return std::sqrt(feedback_input(J, c));
}

// Largest input level the curve can emit; J <= max_input/(1+dhat^2) bounds all roots.
inline double max_input(const FeedbackCurve& c) {
    switch (c.kind) {
        case FeedbackKind::None: return 1.0;
        case FeedbackKind::Smooth: return 1.0 + 0.5 * c.delta_i_rel;
        case FeedbackKind::Step: return c.i2_rel;
    }
    return 1.0;
}

inline double min_input(const FeedbackCurve& c) {
    switch (c.kind) {
        case FeedbackKind::None: return 1.0;
        case FeedbackKind::Smooth: return 1.0 - 0.5 * c.delta_i_rel;
        case FeedbackKind::Step: return c.i1_rel;
    }
    return 1.0;
}

// Scaled position/velocity of one particle.
struct ParticleState {
    double xi = 0.0;  // x / Lambda
    double u = 0.0;   // v / (kappa * Lambda)
};

// Scaled complex cavity amplitude; J = |a|^2.
struct FieldState {
    std::complex<double> a{0.0, 0.0};
    double j() const { return std::norm(a); }
};

// Physical parameters in SI units.
struct PhysicalParams {
    double mass = 0.0;                 // kg
    double alpha_re = 0.0;             // real polarizability, C m^2 / V
    double alpha_im = 0.0;             // imaginary polarizability
    double mode_period = 0.0;          // Lambda, m
    double mirror_transmission = 0.0;  // T, dimensionless
    double cavity_length = 0.0;        // L, m
    double mode_volume = 0.0;          // V, m^3
    double angular_frequency = 0.0;    // pump omega, rad/s
    double input_intensity_mean = 0.0; // I0, field-squared units (V^2/m^2)
    double input_power_mean = 0.0;     // P0, W (used by feasibility estimates)
    double optical_wavelength = 0.0;   // m; 0 = not supplied
};

struct DimensionlessScales {
    CavityParams params;
    double kappa = 0.0;            // s^-1
    double velocity_scale = 0.0;   // kappa * Lambda, m/s
    double recoil_velocity = 0.0;  // 2 pi hbar / (lambda_opt m), m/s; 0 if wavelength unset
};

// kappa = T c / (2 L)
inline double kappa_from(double transmission, double cavity_length) {
    if (transmission <= 0.0 || cavity_length <= 0.0)
        throw std::domain_error("kappa_from: transmission and length must be > 0");
    return transmission * kSpeedOfLight / (2.0 * cavity_length);
}

// Inverse of kappa_from: the transmission a cavity of length L needs for a
// given decay rate.
inline double transmission_for_kappa(double kappa, double cavity_length) {
    if (kappa <= 0.0 || cavity_length <= 0.0)
        throw std::domain_error("transmission_for_kappa: inputs must be > 0");
    return 2.0 * cavity_length * kappa / kSpeedOfLight;
}

inline double recoil_velocity(double optical_wavelength, double mass) {
    if (optical_wavelength <= 0.0 || mass <= 0.0)
        throw std::domain_error("recoil_velocity: inputs must be > 0");
    return 2.0 * kPi * kHbar / (optical_wavelength * mass);
}

inline DimensionlessScales to_dimensionless(const PhysicalParams& phys) {
    if (phys.cavity_length <= 0.0) throw std::domain_error("to_dimensionless: cavity_length must be > 0");
    if (phys.mirror_transmission <= 0.0 || phys.mirror_transmission >= 1.0)
        throw std::domain_error("to_dimensionless: mirror_transmission must be in (0,1)");
    if (phys.mode_volume <= 0.0) throw std::domain_error("to_dimensionless: mode_volume must be > 0");
    if (phys.mass <= 0.0) throw std::domain_error("to_dimensionless: mass must be > 0");
    if (phys.mode_period <= 0.0) throw std::domain_error("to_dimensionless: mode_period must be > 0");
    if (phys.angular_frequency <= 0.0)
        throw std::domain_error("to_dimensionless: angular_frequency must be > 0");

    DimensionlessScales out;
    out.kappa = kappa_from(phys.mirror_transmission, phys.cavity_length);
    const double shift_per_alpha =
        phys.angular_frequency / (kVacuumPermittivity * phys.mode_volume * out.kappa);
    out.params.delta_c = 0.0;  // detuning is a free knob, not derivable from geometry
    out.params.u0 = phys.alpha_re * shift_per_alpha;
    out.params.gamma0 = phys.alpha_im * shift_per_alpha;
    out.params.epsilon = phys.alpha_re * phys.input_intensity_mean /
                         (out.kappa * out.kappa * phys.mode_period * phys.mode_period *
                          phys.mirror_transmission * phys.mass);
    out.velocity_scale = out.kappa * phys.mode_period;
    if (phys.optical_wavelength > 0.0)
        out.recoil_velocity = recoil_velocity(phys.optical_wavelength, phys.mass);
    return out;
}

// Reconstructs the physical inputs consistent with a dimensionless set, given
// the fixed geometry (L, V, omega, Lambda, mass).  Inverse of to_dimensionless
// on (kappa, u0, gamma0, epsilon).
inline PhysicalParams redimensionalize(const CavityParams& p, double kappa,
                                       double cavity_length, double mode_volume,
                                       double angular_frequency, double mode_period,
                                       double mass) {
    PhysicalParams phys;
    phys.cavity_length = cavity_length;
    phys.mode_volume = mode_volume;
    phys.angular_frequency = angular_frequency;
    phys.mode_period = mode_period;
    phys.mass = mass;
    phys.mirror_transmission = transmission_for_kappa(kappa, cavity_length);
    const double shift_per_alpha =
        angular_frequency / (kVacuumPermittivity * mode_volume * kappa);
    phys.alpha_re = p.u0 / shift_per_alpha;
    phys.alpha_im = p.gamma0 / shift_per_alpha;
    if (phys.alpha_re != 0.0)
        phys.input_intensity_mean = p.epsilon * kappa * kappa * mode_period * mode_period *
                                    phys.mirror_transmission * mass / phys.alpha_re;
    return phys;
}

}  // namespace bicavity
