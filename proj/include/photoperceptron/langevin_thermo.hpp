#pragma once

// Overdamped Langevin dynamics in a biased quartic double well with
// trajectory-level work/heat bookkeeping, an independent quadrature
// free-energy oracle, Jarzynski estimation, Kramers first-passage statistics,
// and the physical switch trial used as a perceptron backend.
//
// Potential: V(x, lambda) = dV ((x/x0)^2 - 1)^2 + lambda x.
// Work convention (Crooks splitting): the bias slope moves at frozen x,
// dW = x dlambda; the particle then relaxes at frozen lambda and the energy it
// sheds is heat, so W = dE + Q holds as an identity of the bookkeeping.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "photoperceptron/rng.hpp"

namespace photoperceptron::langevin {

/// Largest allowed step as a fraction of the natural time gamma x0^2 / dV.
inline constexpr double kMaxStepFraction = 0.05;

struct DoubleWellSpec {
    double barrier = 1.0;   // dV
    double half_sep = 1.0;  // x0
    double gamma = 1.0;     // friction
    double beta = 1.0;      // 1/(k_B T)

    void validate() const {
        if (!(barrier > 0.0) || !(half_sep > 0.0) || !(gamma > 0.0) || !(beta > 0.0))
            throw std::invalid_argument("DoubleWellSpec: barrier, half_sep, gamma, beta must be > 0");
    }
    /// Natural relaxation scale gamma x0^2 / dV.
    double natural_time() const { return gamma * half_sep * half_sep / barrier; }
    double default_dt() const { return 1e-3 * natural_time(); }
};

inline double potential(const DoubleWellSpec& s, double lambda, double x) {
    const double u = (x / s.half_sep) * (x / s.half_sep) - 1.0;
    return s.barrier * u * u + lambda * x;
}

inline double force(const DoubleWellSpec& s, double lambda, double x) {
    const double r = x / s.half_sep;
    return -(4.0 * s.barrier * r * (r * r - 1.0) / s.half_sep + lambda);
}

/// One Euler-Maruyama step: x' = x + F dt/gamma + sqrt(2 dt/(beta gamma)) xi.
inline double step(rng::Stream& stream, double x, const DoubleWellSpec& s, double lambda,
                   double dt) {
    if (!(dt > 0.0) || dt > kMaxStepFraction * s.natural_time())
        throw std::invalid_argument("step: dt outside (0, 0.05 gamma x0^2/dV]");
    return x + force(s, lambda, x) * dt / s.gamma +
           std::sqrt(2.0 * dt / (s.beta * s.gamma)) * stream.normal();
}

/// Piecewise-linear schedule of the bias slope lambda(t).
struct BiasProtocol {
    std::vector<std::pair<double, double>> knots;  // (t, lambda), t strictly increasing
    double dt = 1e-3;

    double t_start() const { return knots.front().first; }
    double t_end() const { return knots.back().first; }
    double lambda_at(double t) const {
        if (t <= knots.front().first) return knots.front().second;
        if (t >= knots.back().first) return knots.back().second;
        for (std::size_t i = 1; i < knots.size(); ++i) {
            if (t <= knots[i].first) {
                const auto& [t0, l0] = knots[i - 1];
                const auto& [t1, l1] = knots[i];
                return l0 + (l1 - l0) * (t - t0) / (t1 - t0);
            }
        }
        return knots.back().second;
    }

    void validate() const {
        if (knots.size() < 2) throw std::invalid_argument("BiasProtocol: need >= 2 knots");
        for (std::size_t i = 1; i < knots.size(); ++i)
            if (!(knots[i].first > knots[i - 1].first))
                throw std::invalid_argument("BiasProtocol: knot times must increase");
        if (!(dt > 0.0)) throw std::invalid_argument("BiasProtocol: dt must be > 0");
    }

    static BiasProtocol ramp(double lambda0, double lambda1, double duration, double dt) {
        return BiasProtocol{{{0.0, lambda0}, {duration, lambda1}}, dt};
    }
    static BiasProtocol cyclic(double lambda_max, double duration, double dt) {
        return BiasProtocol{{{0.0, 0.0}, {0.5 * duration, lambda_max}, {duration, 0.0}}, dt};
    }
    static BiasProtocol constant(double lambda, double duration, double dt) {
        return BiasProtocol{{{0.0, lambda}, {duration, lambda}}, dt};
    }
};

struct TrajectoryRecord {
    double work = 0.0;
    double heat = 0.0;      // dissipated into the environment
    double delta_E = 0.0;   // potential-energy change
    int final_side = 0;     // sign of x at the end
    std::optional<double> first_passage_time;  // first crossing of x = 0
};

namespace detail {

// Kahan-compensated accumulator; keeps W = dE + Q exact to ~1 ulp over long runs.
struct Kahan {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

}  // namespace detail

/// Integrate one trajectory through the protocol, accumulating work at the
/// lambda updates and heat from the relaxation sub-steps.
inline TrajectoryRecord run_protocol(rng::Stream& stream, const DoubleWellSpec& spec,
                                     const BiasProtocol& protocol, double x_init) {
    spec.validate();
    protocol.validate();
    const double duration = protocol.t_end() - protocol.t_start();
    const int n_steps = std::max(1, static_cast<int>(std::llround(duration / protocol.dt)));
    const double h = duration / n_steps;

    double x = x_init;
    double lambda = protocol.lambda_at(protocol.t_start());
    const double e0 = potential(spec, lambda, x);
    const int side0 = x >= 0.0 ? 1 : -1;
    detail::Kahan work, heat;
    std::optional<double> fpt;

    for (int k = 0; k < n_steps; ++k) {
        const double t_next = protocol.t_start() + (k + 1) * h;
        const double lambda_next = protocol.lambda_at(t_next);
        work.add(x * (lambda_next - lambda));
        const double e_before = potential(spec, lambda_next, x);
        x = step(stream, x, spec, lambda_next, h);
        heat.add(e_before - potential(spec, lambda_next, x));
        lambda = lambda_next;
        if (!fpt && (x >= 0.0 ? 1 : -1) != side0) fpt = t_next - protocol.t_start();
    }

    TrajectoryRecord rec;
    rec.work = work.sum;
    rec.heat = heat.sum;
    rec.delta_E = potential(spec, lambda, x) - e0;
    rec.final_side = x >= 0.0 ? 1 : -1;
    rec.first_passage_time = fpt;
    return rec;
}

/// Draw x from the Boltzmann density at fixed lambda by rejection sampling
/// under a uniform envelope on a bracket that contains all non-negligible weight.
inline double sample_equilibrium(rng::Stream& stream, const DoubleWellSpec& spec, double lambda) {
    spec.validate();
    double L = 3.0 * spec.half_sep;
    double vmin = potential(spec, lambda, 0.0);
    for (;;) {
        const int n_scan = 512;
        vmin = potential(spec, lambda, -L);
        for (int i = 1; i <= n_scan; ++i)
            vmin = std::min(vmin, potential(spec, lambda, -L + 2.0 * L * i / n_scan));
        const double edge = std::max(potential(spec, lambda, -L), potential(spec, lambda, L));
        if (spec.beta * (edge - vmin) > 42.0) break;
        L *= 1.5;
    }
    for (;;) {
        const double x = -L + 2.0 * L * stream.uniform01();
        if (stream.uniform01() <= std::exp(-spec.beta * (potential(spec, lambda, x) - vmin)))
            return x;
    }
}

/// Partition function Z(lambda) by Simpson quadrature, refined until stable.
inline double log_partition(const DoubleWellSpec& spec, double lambda) {
    double L = 3.0 * spec.half_sep;
    for (;;) {
        double vmin = potential(spec, lambda, -L);
        const int n_scan = 1024;
        for (int i = 1; i <= n_scan; ++i)
            vmin = std::min(vmin, potential(spec, lambda, -L + 2.0 * L * i / n_scan));
        const double edge = std::max(potential(spec, lambda, -L), potential(spec, lambda, L));
        if (spec.beta * (edge - vmin) > 46.0) break;
        L *= 1.5;
    }
    double vmin = potential(spec, lambda, -L);
    {
        const int n_scan = 4096;
        for (int i = 1; i <= n_scan; ++i)
            vmin = std::min(vmin, potential(spec, lambda, -L + 2.0 * L * i / n_scan));
    }
    auto simpson = [&](int n) {  // n even intervals over [-L, L]
        const double h = 2.0 * L / n;
        double acc = std::exp(-spec.beta * (potential(spec, lambda, -L) - vmin)) +
                     std::exp(-spec.beta * (potential(spec, lambda, L) - vmin));
        for (int i = 1; i < n; ++i)
            acc += (i % 2 ? 4.0 : 2.0) *
                   std::exp(-spec.beta * (potential(spec, lambda, -L + h * i) - vmin));
        return acc * h / 3.0;
    };
    int n = 2048;
    double prev = simpson(n);
    for (int it = 0; it < 8; ++it) {
        n *= 2;
        const double cur = simpson(n);
        if (std::abs(cur - prev) <= 1e-13 * std::abs(cur)) {
            prev = cur;
            break;
        }
        prev = cur;
    }
    return std::log(prev) - spec.beta * vmin;
}

/// Independent oracle for the Jarzynski check:
/// dF = -(1/beta) ln(Z(lambda1)/Z(lambda0)).
inline double free_energy_difference(const DoubleWellSpec& spec, double lambda0, double lambda1) {
    spec.validate();
    if (lambda0 == lambda1) return 0.0;
    return -(log_partition(spec, lambda1) - log_partition(spec, lambda0)) / spec.beta;
}

struct JarzynskiEstimate {
    double estimate = 0.0;      // sample mean of exp(-beta W)
    double standard_error = 0.0;
    double mean_work = 0.0;
};

inline JarzynskiEstimate jarzynski_estimate(const std::vector<TrajectoryRecord>& records,
                                            double beta) {
    if (records.size() < 2)
        throw std::invalid_argument("jarzynski_estimate: need >= 2 trajectories");
    const double n = static_cast<double>(records.size());
    double mean = 0.0, mean_w = 0.0;
    for (const auto& r : records) {
        mean += std::exp(-beta * r.work);
        mean_w += r.work;
    }
    mean /= n;
    mean_w /= n;
    double var = 0.0;
    for (const auto& r : records) {
        const double d = std::exp(-beta * r.work) - mean;
        var += d * d;
    }
    var /= (n - 1.0);
    return JarzynskiEstimate{mean, std::sqrt(var / n), mean_w};
}

namespace detail {

template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || n < 2) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::int64_t i = t; i < n; i += threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

/// Run `n` independent trajectories of the protocol from equilibrium initial
/// conditions at lambda(t_start).  Per-trajectory streams derive from `key`,
/// so the result is identical for any thread count.
inline std::vector<TrajectoryRecord> run_protocol_ensemble(rng::Key key,
                                                           const DoubleWellSpec& spec,
                                                           const BiasProtocol& protocol,
                                                           std::int64_t n, int threads = 1) {
    std::vector<TrajectoryRecord> out(n);
    detail::parallel_for(n, threads, [&](std::int64_t i) {
        rng::Stream init = key.child(i).child(0).stream();
        rng::Stream path = key.child(i).child(1).stream();
        const double x0 = sample_equilibrium(init, spec, protocol.lambda_at(protocol.t_start()));
        out[i] = run_protocol(path, spec, protocol, x0);
    });
    return out;
}

struct FirstPassageResult {
    double rate = 0.0;
    double rate_se = 0.0;
    double mfpt = 0.0;
    double mfpt_se = 0.0;
    std::int64_t n_censored = 0;
};

/// Mean first-passage time from the left minimum (-x0, lambda=0) to x = 0;
/// rate = 1/MFPT with the delta-method standard error.  Trajectories that
/// exceed t_max are censored (excluded from the mean, counted in the result).
inline FirstPassageResult first_passage_rate(rng::Key key, const DoubleWellSpec& spec,
                                             std::int64_t n_trajectories, double dt = 0.0,
                                             double t_max = 0.0, int threads = 1) {
    spec.validate();
    if (n_trajectories < 2)
        throw std::invalid_argument("first_passage_rate: need >= 2 trajectories");
    if (dt <= 0.0) dt = spec.default_dt();
    if (t_max <= 0.0)
        t_max = 100.0 * spec.natural_time() * std::exp(std::min(8.0, spec.beta * spec.barrier));
    const std::int64_t max_steps = static_cast<std::int64_t>(t_max / dt);

    std::vector<double> times(n_trajectories, -1.0);
    detail::parallel_for(n_trajectories, threads, [&](std::int64_t i) {
        rng::Stream s = key.child(i).stream();
        double x = -spec.half_sep;
        for (std::int64_t k = 0; k < max_steps; ++k) {
            x = step(s, x, spec, 0.0, dt);
            if (x >= 0.0) {
                times[i] = (k + 1) * dt;
                return;
            }
        }
    });

    double mean = 0.0;
    std::int64_t censored = 0, kept = 0;
    for (double t : times) {
        if (t < 0.0) {
            ++censored;
        } else {
            mean += t;
            ++kept;
        }
    }
    if (kept < 2) throw std::runtime_error("first_passage_rate: all trajectories censored");
    mean /= kept;
    double var = 0.0;
    for (double t : times)
        if (t >= 0.0) var += (t - mean) * (t - mean);
    var /= (kept - 1.0);
    const double mfpt_se = std::sqrt(var / kept);
    return FirstPassageResult{1.0 / mean, mfpt_se / (mean * mean), mean, mfpt_se, censored};
}

struct SwitchTrialResult {
    int n = 0;          // final side, +-1
    double work = 0.0;
    double heat = 0.0;
};

/// One physical activation-switch trial: equilibrate at lambda = 0 in the well
/// opposing the bias, ramp the slope to lambda = -A/(2 x0) (the well-depth
/// difference then equals A, matching the two-state sigmoid), hold for
/// `window`, and report the final side with full energy bookkeeping.
inline SwitchTrialResult switch_trial(rng::Stream& stream, const DoubleWellSpec& spec, double bias,
                                      double window, double equil_time = 0.0,
                                      double ramp_time = 0.0, double dt = 0.0) {
    spec.validate();
    if (!(window > 0.0)) throw std::invalid_argument("switch_trial: window must be > 0");
    if (dt <= 0.0) dt = spec.default_dt();
    if (equil_time <= 0.0) equil_time = spec.natural_time();
    if (ramp_time <= 0.0) ramp_time = 0.5 * spec.natural_time();

    const double lambda_final = -bias / (2.0 * spec.half_sep);
    double x = bias >= 0.0 ? -spec.half_sep : spec.half_sep;
    const std::int64_t n_eq = std::max<std::int64_t>(1, std::llround(equil_time / dt));
    for (std::int64_t k = 0; k < n_eq; ++k) x = step(stream, x, spec, 0.0, dt);

    BiasProtocol proto{{{0.0, 0.0}, {ramp_time, lambda_final}, {ramp_time + window, lambda_final}},
                       dt};
    const TrajectoryRecord rec = run_protocol(stream, spec, proto, x);
    return SwitchTrialResult{rec.final_side, rec.work, rec.heat};
}

}  // namespace photoperceptron::langevin
