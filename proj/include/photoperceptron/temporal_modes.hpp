#pragma once

// Discretized calculus of complex temporal mode functions nu(t) on a uniform
// grid: Hermite-Gaussian basis, superposition, trapezoidal inner products.
// Amplitudes carry units s^(-1/2) so |nu(t)|^2 integrates to a probability.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace photoperceptron::modes {

using Complex = std::complex<double>;

/// Absolute tolerance for "this mode is normalized" under the trapezoid rule.
inline constexpr double kQuadTol = 1e-8;

struct TemporalGrid {
    double t_min = 0.0;
    double t_max = 0.0;
    int n_points = 0;
    double dt = 0.0;

    double time_at(int k) const { return t_min + dt * k; }
    bool same_as(const TemporalGrid& o) const {
        return t_min == o.t_min && t_max == o.t_max && n_points == o.n_points;
    }
    bool contains(double t) const { return t >= t_min && t <= t_max; }
};

inline TemporalGrid make_grid(double t_min, double t_max, int n_points) {
    if (!std::isfinite(t_min) || !std::isfinite(t_max))
        throw std::invalid_argument("make_grid: non-finite bounds");
    if (!(t_min < t_max)) throw std::invalid_argument("make_grid: requires t_min < t_max");
    if (n_points < 2) throw std::invalid_argument("make_grid: requires n_points >= 2");
    return TemporalGrid{t_min, t_max, n_points, (t_max - t_min) / (n_points - 1)};
}

/// Default experiment grid: [-8 sigma, 8 sigma], 4096 points. Gaussian tails
/// are below 1e-14 and the u0..u5 Gram matrix is orthonormal to 1e-8.
inline TemporalGrid default_grid(double sigma) { return make_grid(-8.0 * sigma, 8.0 * sigma, 4096); }

struct TemporalMode {
    TemporalGrid grid;
    std::vector<Complex> amplitude;
    bool normalized = false;
};

struct HermiteGaussianSpec {
    int order = 0;
    double width = 1.0;
    double center = 0.0;
};

namespace detail {

inline void require_same_grid(const TemporalMode& a, const TemporalMode& b, const char* where) {
    if (!a.grid.same_as(b.grid)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

inline double trap_weight(int k, int n) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; }

}  // namespace detail

/// Trapezoid-rule integral of conj(mu)*nu dt; conjugate-symmetric by construction.
inline Complex inner_product(const TemporalMode& mu, const TemporalMode& nu) {
    detail::require_same_grid(mu, nu, "inner_product");
    const int n = mu.grid.n_points;
    Complex acc = 0.5 * (std::conj(mu.amplitude[0]) * nu.amplitude[0] +
                         std::conj(mu.amplitude[n - 1]) * nu.amplitude[n - 1]);
    for (int k = 1; k < n - 1; ++k) acc += std::conj(mu.amplitude[k]) * nu.amplitude[k];
    return acc * mu.grid.dt;
}

inline double norm_squared(const TemporalMode& m) { return inner_product(m, m).real(); }

/// u_n(t) = (2^n n! sigma sqrt(pi))^(-1/2) H_n((t-t0)/sigma) exp(-(t-t0)^2/(2 sigma^2)),
/// physicists' Hermite polynomials, evaluated through the normalized recurrence.
/// Throws if the grid does not resolve the mode (quadrature norm off by > kQuadTol).
inline TemporalMode hermite_gaussian(const HermiteGaussianSpec& spec, const TemporalGrid& grid) {
    if (spec.order < 0) throw std::invalid_argument("hermite_gaussian: order must be >= 0");
    if (!(spec.width > 0.0) || !std::isfinite(spec.width))
        throw std::invalid_argument("hermite_gaussian: width must be positive");

    TemporalMode m;
    m.grid = grid;
    m.amplitude.resize(grid.n_points);
    const double inv_sqrt_sigma = 1.0 / std::sqrt(spec.width);
    for (int k = 0; k < grid.n_points; ++k) {
        const double xi = (grid.time_at(k) - spec.center) / spec.width;
        double phi_prev = std::pow(M_PI, -0.25) * std::exp(-0.5 * xi * xi);
        double phi = phi_prev;
        if (spec.order >= 1) phi = std::sqrt(2.0) * xi * phi_prev;
        for (int q = 1; q < spec.order; ++q) {
            const double next =
                xi * std::sqrt(2.0 / (q + 1)) * phi - std::sqrt(q / (q + 1.0)) * phi_prev;
            phi_prev = phi;
            phi = next;
        }
        m.amplitude[k] = phi * inv_sqrt_sigma;
    }
    const double nrm = norm_squared(m);
    if (std::abs(nrm - 1.0) > kQuadTol)
        throw std::invalid_argument("hermite_gaussian: order " + std::to_string(spec.order) +
                                    " is not resolved on this grid (norm " + std::to_string(nrm) +
                                    ")");
    m.normalized = true;
    return m;
}

/// Pointwise linear combination. The normalized flag reflects the measured
/// quadrature norm of the result (unit when coefficients have unit norm over
/// orthonormal modes).
inline TemporalMode superpose(std::span<const TemporalMode> ms, std::span<const Complex> coeffs) {
    if (ms.empty() || ms.size() != coeffs.size())
        throw std::invalid_argument("superpose: modes/coefficients size mismatch");
    for (std::size_t i = 1; i < ms.size(); ++i)
        detail::require_same_grid(ms[0], ms[i], "superpose");
    TemporalMode out;
    out.grid = ms[0].grid;
    out.amplitude.assign(out.grid.n_points, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < ms.size(); ++i)
        for (int k = 0; k < out.grid.n_points; ++k)
            out.amplitude[k] += coeffs[i] * ms[i].amplitude[k];
    out.normalized = std::abs(norm_squared(out) - 1.0) <= kQuadTol;
    return out;
}

inline TemporalMode superpose(std::initializer_list<TemporalMode> ms,
                              std::initializer_list<Complex> coeffs) {
    return superpose(std::span<const TemporalMode>(ms.begin(), ms.size()),
                     std::span<const Complex>(coeffs.begin(), coeffs.size()));
}

/// Rescale to unit quadrature norm. Throws on an (all-zero) null mode.
inline TemporalMode normalize(const TemporalMode& m) {
    const double n2 = norm_squared(m);
    if (!(n2 > 0.0)) throw std::invalid_argument("normalize: null mode");
    TemporalMode out = m;
    const double s = 1.0 / std::sqrt(n2);
    for (auto& a : out.amplitude) a *= s;
    out.normalized = true;
    return out;
}

/// Pulse-code mode nu_y = (u0 + x u1)/sqrt(2), x = 2y-1: intensity peak at
/// t<0 for y=0 and t>0 for y=1.
inline TemporalMode pulse_code_mode(int y, const TemporalGrid& grid, double sigma) {
    if (y != 0 && y != 1) throw std::invalid_argument("pulse_code_mode: y must be 0 or 1");
    const double x = 2.0 * y - 1.0;
    const TemporalMode u0 = hermite_gaussian({0, sigma, 0.0}, grid);
    const TemporalMode u1 = hermite_gaussian({1, sigma, 0.0}, grid);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    return superpose({u0, u1}, {Complex{inv_sqrt2, 0.0}, Complex{x * inv_sqrt2, 0.0}});
}

/// Time of the intensity maximum |nu(t)|^2 (grid-resolution argmax).
inline double intensity_argmax(const TemporalMode& m) {
    int best = 0;
    double best_v = -1.0;
    for (int k = 0; k < m.grid.n_points; ++k) {
        const double v = std::norm(m.amplitude[k]);
        if (v > best_v) {
            best_v = v;
            best = k;
        }
    }
    return m.grid.time_at(best);
}

/// Linear interpolation of the amplitude at time t (t must lie in the grid).
inline Complex amplitude_at(const TemporalMode& m, double t) {
    if (!m.grid.contains(t)) throw std::out_of_range("amplitude_at: t outside grid");
    const double s = (t - m.grid.t_min) / m.grid.dt;
    const int k = std::min(static_cast<int>(s), m.grid.n_points - 2);
    const double f = s - k;
    return (1.0 - f) * m.amplitude[k] + f * m.amplitude[k + 1];
}

}  // namespace photoperceptron::modes
