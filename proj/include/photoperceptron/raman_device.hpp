#pragma once

// Raman single-photon source (RSPS) and detector (RSPD) models: write-field
// emission flux, the dynamical absorption probability with its exponential
// memory kernel, the ideal projective detector, Bernoulli detection, and the
// detector->source swap.
//
// A read field factors as E_r(t) = g * shape(t) with shape normalized, so the
// total dimensionless interaction time is tau(infinity) = g^2.  The absorption
// kernel integrand conjugates the read field at the running time t', which is
// the only reading that keeps the probability dimensionless and bounded.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "photoperceptron/rng.hpp"
#include "photoperceptron/temporal_modes.hpp"

namespace photoperceptron::raman {

using modes::Complex;
using modes::TemporalGrid;
using modes::TemporalMode;

inline constexpr double kHBar = 1.054571817e-34;  // J s

struct ReadField {
    TemporalMode shape;  // normalized
    double scale = 1.0;  // g, units s^(-1/2)
};

inline ReadField make_read_field(TemporalMode shape, double g) {
    if (!shape.normalized) throw std::invalid_argument("make_read_field: shape must be normalized");
    if (!(g >= 0.0) || !std::isfinite(g))
        throw std::invalid_argument("make_read_field: scale must be finite and >= 0");
    return ReadField{std::move(shape), g};
}

/// Cavity/control frequencies with the Raman resonance omega_c = omega_a - omega_b
/// enforced by construction.  omega_a prices one lost photon at hbar*omega_a.
struct RamanDeviceSpec {
    double omega_a = 0.0;
    double omega_b = 0.0;
    double omega_c = 0.0;

    static RamanDeviceSpec make(double omega_a, double omega_b) {
        if (!(omega_a > 0.0)) throw std::invalid_argument("RamanDeviceSpec: omega_a must be > 0");
        return RamanDeviceSpec{omega_a, omega_b, omega_a - omega_b};
    }
    double photon_energy_joules() const { return kHBar * omega_a; }
};

enum class DetectorModel { IdealProjective, DynamicalRaman };

struct AbsorptionOutcome {
    bool absorbed = false;
    double p_used = 0.0;
};

/// Mean photon emission rate |E_w(t)|^2 of the ideal RSPS (linear interpolation
/// between grid samples). Integrates to g^2 over the grid.
inline double emission_flux(const ReadField& write_field, double t) {
    const Complex a = modes::amplitude_at(write_field.shape, t);
    return write_field.scale * write_field.scale * std::norm(a);
}

/// The single-photon mode produced by the ideal RSPS: the normalized
/// write-field shape.  Scale does not change the shape.
inline TemporalMode emitted_mode(const ReadField& write_field) {
    if (write_field.scale == 0.0) throw std::invalid_argument("emitted_mode: zero write field");
    return write_field.shape;
}

/// Swapping the detector electronic state turns it into a source: the
/// re-emitted photon has the learned read-field shape.
inline TemporalMode swap_to_source(const ReadField& learned_field) {
    if (learned_field.scale == 0.0) throw std::invalid_argument("swap_to_source: zero field");
    return learned_field.shape;
}

/// Cumulative interaction time tau(t_k) = int_{t_min}^{t_k} |E_r|^2 dt' at every node.
inline std::vector<double> tau_profile(const ReadField& field) {
    const int n = field.shape.grid.n_points;
    const double h = field.shape.grid.dt;
    const double g2 = field.scale * field.scale;
    std::vector<double> tau(n);
    tau[0] = 0.0;
    double prev = std::norm(field.shape.amplitude[0]);
    for (int k = 1; k < n; ++k) {
        const double cur = std::norm(field.shape.amplitude[k]);
        tau[k] = tau[k - 1] + 0.5 * h * g2 * (prev + cur);
        prev = cur;
    }
    return tau;
}

/// tau(t), clamped to [0, tau(t_max)] outside the grid.
inline double tau_transform(const ReadField& field, double t) {
    const auto& grid = field.shape.grid;
    const std::vector<double> tau = tau_profile(field);
    if (t <= grid.t_min) return 0.0;
    if (t >= grid.t_max) return tau.back();
    const double s = (t - grid.t_min) / grid.dt;
    const int k = std::min(static_cast<int>(s), grid.n_points - 2);
    const double f = s - k;
    return (1.0 - f) * tau[k] + f * tau[k + 1];
}

/// p_A(t_k) = |int_{t_min}^{t_k} dt' E_r*(t') nu(t') exp(-(tau(t_k)-tau(t'))/2)|^2
/// at every grid node, by a single forward pass: the running integral decays by
/// exp(-dtau/2) once per step and the increment is trapezoid-consistent.
inline std::vector<double> absorption_profile(const ReadField& field, const TemporalMode& photon) {
    modes::detail::require_same_grid(field.shape, photon, "absorption_profile");
    if (!photon.normalized)
        throw std::invalid_argument("absorption_profile: photon must be normalized");
    const int n = field.shape.grid.n_points;
    const double h = field.shape.grid.dt;
    const double g = field.scale;
    std::vector<double> p(n);
    Complex integral{0.0, 0.0};
    p[0] = 0.0;
    double abs2_prev = g * g * std::norm(field.shape.amplitude[0]);
    Complex f_prev = g * std::conj(field.shape.amplitude[0]) * photon.amplitude[0];
    for (int k = 1; k < n; ++k) {
        const double abs2 = g * g * std::norm(field.shape.amplitude[k]);
        const Complex f = g * std::conj(field.shape.amplitude[k]) * photon.amplitude[k];
        const double dtau = 0.5 * h * (abs2_prev + abs2);
        integral = std::exp(-0.5 * dtau) * (integral + 0.5 * h * f_prev) + 0.5 * h * f;
        const double v = std::norm(integral);
        p[k] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        abs2_prev = abs2;
        f_prev = f;
    }
    return p;
}

/// p_A evaluated at an arbitrary time t (linear interpolation between nodes).
inline double absorption_probability(const ReadField& field, const TemporalMode& photon, double t) {
    const auto& grid = field.shape.grid;
    const std::vector<double> p = absorption_profile(field, photon);
    if (t <= grid.t_min) return 0.0;
    if (t >= grid.t_max) return p.back();
    const double s = (t - grid.t_min) / grid.dt;
    const int k = std::min(static_cast<int>(s), grid.n_points - 2);
    const double f = s - k;
    return (1.0 - f) * p[k] + f * p[k + 1];
}

/// Ideal projective detector, P(mu|nu) = |<mu|nu>|^2.
inline double ideal_projection_probability(const TemporalMode& mu, const TemporalMode& nu) {
    modes::detail::require_same_grid(mu, nu, "ideal_projection_probability");
    if (!mu.normalized || !nu.normalized)
        throw std::invalid_argument("ideal_projection_probability: modes must be normalized");
    const double v = std::norm(modes::inner_product(mu, nu));
    return v > 1.0 ? 1.0 : v;
}

/// Detection probability of `photon` for the given read field under `model`
/// (dynamical detection evaluated at the end of the grid window).
inline double detection_probability(const ReadField& field, const TemporalMode& photon,
                                    DetectorModel model) {
    if (model == DetectorModel::IdealProjective)
        return ideal_projection_probability(field.shape, photon);
    return absorption_profile(field, photon).back();
}

/// One photo-counting trial: Bernoulli(p) draw from the caller's stream.
inline AbsorptionOutcome detect(rng::Stream& stream, const ReadField& field,
                                const TemporalMode& photon, DetectorModel model) {
    const double p = detection_probability(field, photon, model);
    return AbsorptionOutcome{stream.bernoulli(p), p};
}

}  // namespace photoperceptron::raman
