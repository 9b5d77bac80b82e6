#pragma once

// Quantum-optical perceptron learning loops: NOT-gate training over the
// read-field weight with activation A(w) = x w - 1, matched-filter learning of
// a hidden temporal mode by variation over read-field shapes, inference by the
// detector->source swap, and the photon-quanta dissipation ledger.
//
// Error signal for the NOT task (default): absorption probability, which
// vanishes at w = -1 where the read field equals the NOT-target mode and is
// orthogonal to the input photon.  The opposite
// direction (reflection as error, absorption maximized) is a config switch and
// is what the matched-filter task always uses.
//
// Dissipation convention: one quantum of hbar*omega_a is lost per error trial,
// so energy per trial in quanta equals the sampled error rate identically.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "photoperceptron/raman_device.hpp"
#include "photoperceptron/rng.hpp"
#include "photoperceptron/temporal_modes.hpp"
#include "photoperceptron/thermo_ledger.hpp"

namespace photoperceptron::quantum {

using modes::Complex;
using modes::TemporalGrid;
using modes::TemporalMode;
using raman::DetectorModel;
using raman::ReadField;

enum class Objective { MinimizeAbsorption, MaximizeAbsorption };
enum class TrainStatus { Completed, Stalled, Diverged };

struct QuantumTrainingConfig {
    DetectorModel model = DetectorModel::IdealProjective;
    std::int64_t trials_per_epoch = 10000;
    int epochs = 200;
    double eta = 0.5;    // learning rate
    double delta = 0.1;  // finite-difference half-step
    std::uint64_t seed = 0;
    double sigma = 1.0;  // mode width
    double g = 1.0;      // read-field scale
    int K = 2;           // basis size for the mode-learning task
    int n_points = 4096;
    double weight_sigma_init = 0.5;         // NOT-weight init std (basin of w = -1)
    double initial_weight = 0.0;            // used when use_initial_weight
    bool use_initial_weight = false;
    std::vector<Complex> initial_coeffs;    // mode-learn start; empty = uniform on the sphere
    bool exact_gradient = false;            // infinite-trials surrogate (NOT task)
    Objective objective = Objective::MinimizeAbsorption;
    double divergence_bound = 8.0;
    int stall_window = 10;

    void validate() const {
        if (!(eta > 0.0) || !(delta > 0.0))
            throw std::invalid_argument("QuantumTrainingConfig: eta and delta must be > 0");
        if (K < 2) throw std::invalid_argument("QuantumTrainingConfig: K must be >= 2");
        if (epochs < 1 || trials_per_epoch < 1)
            throw std::invalid_argument("QuantumTrainingConfig: epochs/trials must be >= 1");
        if (!(sigma > 0.0) || !(g >= 0.0))
            throw std::invalid_argument("QuantumTrainingConfig: sigma > 0 and g >= 0 required");
    }
    TemporalGrid grid() const { return modes::make_grid(-8.0 * sigma, 8.0 * sigma, n_points); }
};

struct NotGateState {
    double w = 0.0;
};

/// Read field of the NOT perceptron:
/// shape = (u0 + exp(i pi A/2) u1)/sqrt(2) with A(w) = x w - 1, scale g.
inline ReadField read_field_for(double w, int x, const TemporalGrid& grid, double sigma,
                                double g) {
    if (x != 1 && x != -1) throw std::invalid_argument("read_field_for: x must be +-1");
    const double a = x * w - 1.0;
    const TemporalMode u0 = modes::hermite_gaussian({0, sigma, 0.0}, grid);
    const TemporalMode u1 = modes::hermite_gaussian({1, sigma, 0.0}, grid);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const Complex phase = std::exp(Complex{0.0, M_PI * a / 2.0});
    TemporalMode shape =
        modes::superpose({u0, u1}, {Complex{inv_sqrt2, 0.0}, phase * inv_sqrt2});
    return raman::make_read_field(std::move(shape), g);
}

/// Mean absorption probability of the NOT configuration at weight w:
/// eps(w) = (P_abs(x=-1) + P_abs(x=+1))/2 with input photon nu_y, y=(x+1)/2.
inline double not_gate_error(double w, DetectorModel model, const TemporalGrid& grid,
                             double sigma, double g) {
    double total = 0.0;
    for (int x : {-1, +1}) {
        const TemporalMode photon = modes::pulse_code_mode((x + 1) / 2, grid, sigma);
        const ReadField field = read_field_for(w, x, grid, sigma, g);
        total += raman::detection_probability(field, photon, model);
    }
    return 0.5 * total;
}

/// Output photon of the trained device: swap the detector into a source.
/// At w = -1 the output is nu_{1-y}, realizing the NOT gate.
inline TemporalMode infer_not(double w, int x, const TemporalGrid& grid, double sigma, double g) {
    return raman::swap_to_source(read_field_for(w, x, grid, sigma, g));
}

struct QuantumEpochRecord {
    int epoch = 0;
    double param_summary = 0.0;             // w (NOT) or |c0| (mode learning)
    std::vector<Complex> params;            // pre-update parameters
    double eps_sampled = 0.0;
    double eps_exact = 0.0;
    std::int64_t photons_lost = 0;
    std::int64_t trials = 0;
    double energy_per_trial = 0.0;          // quanta of hbar omega_a
};

struct NotTrainingResult {
    std::vector<QuantumEpochRecord> records;
    double final_w = 0.0;
    TrainStatus status = TrainStatus::Completed;
};

namespace detail {

inline double oriented_error(double p_abs, Objective obj) {
    return obj == Objective::MinimizeAbsorption ? p_abs : 1.0 - p_abs;
}

}  // namespace detail

/// Stochastic central-difference descent on the NOT error.  Each epoch
/// estimates eps(w +- delta) from trials_per_epoch photo-counting trials per
/// probe (input x drawn uniformly per trial) and steps
/// w <- w - eta (eps+ - eps-)/(2 delta).  One quantum is lost per error trial.
inline NotTrainingResult train_not_gate(const QuantumTrainingConfig& config) {
    config.validate();
    const TemporalGrid grid = config.grid();
    const rng::Key root = rng::root_key(config.seed, "quantum_not");

    double w;
    if (config.use_initial_weight) {
        w = config.initial_weight;
    } else {
        rng::Stream init = root.child(0).stream();
        w = config.weight_sigma_init * init.normal();
    }

    const TemporalMode photon_m = modes::pulse_code_mode(0, grid, config.sigma);
    const TemporalMode photon_p = modes::pulse_code_mode(1, grid, config.sigma);

    NotTrainingResult result;
    result.records.reserve(config.epochs);

    for (int e = 0; e < config.epochs; ++e) {
        const rng::Key ke = root.child(1 + e);
        QuantumEpochRecord rec;
        rec.epoch = e;
        rec.param_summary = w;
        rec.params = {Complex{w, 0.0}};
        rec.eps_exact = detail::oriented_error(
            not_gate_error(w, config.model, grid, config.sigma, config.g), config.objective);

        double probe_eps[2];
        std::int64_t lost = 0, total = 0;
        for (int side = 0; side < 2; ++side) {
            const double wp = w + (side == 0 ? config.delta : -config.delta);
            if (config.exact_gradient) {
                probe_eps[side] = detail::oriented_error(
                    not_gate_error(wp, config.model, grid, config.sigma, config.g),
                    config.objective);
                continue;
            }
            double p_abs[2];
            for (int x : {-1, +1}) {
                const ReadField field = read_field_for(wp, x, grid, config.sigma, config.g);
                p_abs[(x + 1) / 2] = raman::detection_probability(
                    field, x == -1 ? photon_m : photon_p, config.model);
            }
            std::int64_t errors = 0;
            rng::Stream s = ke.child(side).stream();
            for (std::int64_t i = 0; i < config.trials_per_epoch; ++i) {
                const int x = s.bernoulli(0.5) ? 1 : -1;
                const bool absorbed = s.bernoulli(p_abs[(x + 1) / 2]);
                const bool error =
                    config.objective == Objective::MinimizeAbsorption ? absorbed : !absorbed;
                if (error) ++errors;
            }
            probe_eps[side] = static_cast<double>(errors) / config.trials_per_epoch;
            lost += errors;
            total += config.trials_per_epoch;
        }

        rec.photons_lost = lost;
        rec.trials = total;
        if (total > 0) {
            rec.eps_sampled = static_cast<double>(lost) / total;
            rec.energy_per_trial = static_cast<double>(lost) / total;
        } else {
            rec.eps_sampled = 0.5 * (probe_eps[0] + probe_eps[1]);
            rec.energy_per_trial = rec.eps_sampled;
        }
        result.records.push_back(rec);

        w -= config.eta * (probe_eps[0] - probe_eps[1]) / (2.0 * config.delta);
        if (std::abs(w) > config.divergence_bound) {
            result.final_w = w;
            result.status = TrainStatus::Diverged;
            return result;
        }
    }
    result.final_w = w;
    result.status = TrainStatus::Completed;
    return result;
}

/// Variational read-field shape over {u_0..u_{K-1}}: unit-norm complex
/// coefficients, global phase fixed (leading coefficient real non-negative).
struct ModeLearnState {
    std::vector<Complex> c;
};

namespace detail {

/// Phase/amplitude chart with norm and global phase fixed: K-1 hyperspherical
/// amplitude angles plus K-1 relative phases (2K-2 free real parameters).
struct Chart {
    std::vector<double> theta;  // K-1
    std::vector<double> phi;    // K-1

    int basis_size() const { return static_cast<int>(theta.size()) + 1; }

    std::vector<Complex> coefficients() const {
        const int K = basis_size();
        std::vector<Complex> c(K);
        double s = 1.0;
        for (int k = 0; k + 1 < K; ++k) {
            const double r = s * std::cos(theta[k]);
            c[k] = k == 0 ? Complex{r, 0.0} : r * std::exp(Complex{0.0, phi[k - 1]});
            s *= std::sin(theta[k]);
        }
        c[K - 1] = s * std::exp(Complex{0.0, phi[K - 2]});
        return c;
    }

    static Chart from_coefficients(std::span<const Complex> c) {
        const int K = static_cast<int>(c.size());
        Chart ch;
        ch.theta.resize(K - 1);
        ch.phi.resize(K - 1);
        const double phase0 = std::arg(c[0]);
        double s = 1.0;
        for (int k = 0; k + 1 < K; ++k) {
            const double m = std::abs(c[k]);
            double ratio = s > 1e-300 ? m / s : 0.0;
            ratio = std::min(1.0, std::max(-1.0, ratio));
            ch.theta[k] = std::acos(ratio);
            s *= std::sin(ch.theta[k]);
        }
        for (int k = 1; k < K; ++k) ch.phi[k - 1] = std::arg(c[k]) - phase0;
        return ch;
    }
};

inline std::vector<Complex> gauge_fixed(std::vector<Complex> c) {
    double n2 = 0.0;
    for (const auto& z : c) n2 += std::norm(z);
    if (!(n2 > 0.0)) throw std::invalid_argument("gauge_fixed: null coefficient vector");
    const double inv = 1.0 / std::sqrt(n2);
    std::size_t lead = 0;
    while (lead < c.size() && std::abs(c[lead]) * inv < 1e-12) ++lead;
    const Complex rot =
        lead < c.size() ? std::exp(Complex{0.0, -std::arg(c[lead])}) : Complex{1.0, 0.0};
    for (auto& z : c) z *= inv * rot;
    return c;
}

}  // namespace detail

/// Rebuild the read-field shape from basis coefficients.
inline TemporalMode mode_from_coefficients(std::span<const Complex> c, const TemporalGrid& grid,
                                           double sigma) {
    std::vector<TemporalMode> basis;
    basis.reserve(c.size());
    for (std::size_t k = 0; k < c.size(); ++k)
        basis.push_back(modes::hermite_gaussian({static_cast<int>(k), sigma, 0.0}, grid));
    return modes::superpose(std::span<const TemporalMode>(basis),
                            std::span<const Complex>(c));
}

/// Uniform draw on the unit sphere in C^K (Gaussian and normalize), gauge-fixed.
inline std::vector<Complex> random_unit_coefficients(int K, rng::Stream& stream) {
    std::vector<Complex> c(K);
    for (auto& z : c) z = Complex{stream.normal(), stream.normal()};
    return detail::gauge_fixed(std::move(c));
}

struct ModeLearnResult {
    std::vector<ModeLearnState> states;  // gauge-fixed state after each epoch
    std::vector<QuantumEpochRecord> records;
    ModeLearnState final_state;
    TrainStatus status = TrainStatus::Completed;
};

/// Matched-filter learning: maximize absorption of the hidden single-photon
/// mode by stochastic central differences on the 2K-2 chart parameters.
/// Every reflection costs one quantum; training terminates with Stalled status
/// when the gradient estimate stays below its own noise floor for
/// `stall_window` consecutive epochs.
inline ModeLearnResult train_matched_filter(const TemporalMode& hidden_target,
                                            const QuantumTrainingConfig& config) {
    config.validate();
    const TemporalGrid grid = config.grid();
    if (!hidden_target.grid.same_as(grid))
        throw std::invalid_argument("train_matched_filter: hidden target grid mismatch");
    if (!hidden_target.normalized)
        throw std::invalid_argument("train_matched_filter: hidden target must be normalized");

    const rng::Key root = rng::root_key(config.seed, "quantum_matched_filter");
    detail::Chart chart;
    if (config.initial_coeffs.empty()) {
        rng::Stream init = root.child(0).stream();
        chart = detail::Chart::from_coefficients(random_unit_coefficients(config.K, init));
    } else {
        if (static_cast<int>(config.initial_coeffs.size()) != config.K)
            throw std::invalid_argument("train_matched_filter: initial_coeffs size != K");
        chart = detail::Chart::from_coefficients(detail::gauge_fixed(config.initial_coeffs));
    }

    const int n_free = 2 * config.K - 2;
    auto reflection_prob = [&](const detail::Chart& ch) {
        const TemporalMode mu = mode_from_coefficients(ch.coefficients(), grid, config.sigma);
        const ReadField field = raman::make_read_field(modes::normalize(mu), config.g);
        return 1.0 - raman::detection_probability(field, hidden_target, config.model);
    };

    ModeLearnResult result;
    result.records.reserve(config.epochs);
    result.states.reserve(config.epochs);
    int stall_run = 0;

    for (int e = 0; e < config.epochs; ++e) {
        const rng::Key ke = root.child(1 + e);
        QuantumEpochRecord rec;
        rec.epoch = e;
        rec.params = detail::gauge_fixed(chart.coefficients());
        rec.param_summary = std::abs(rec.params[0]);
        rec.eps_exact = reflection_prob(chart);

        std::vector<double> grad(n_free, 0.0);
        double var_floor = 0.0;
        std::int64_t lost = 0, total = 0;
        for (int j = 0; j < n_free; ++j) {
            double est[2];
            for (int side = 0; side < 2; ++side) {
                detail::Chart probe = chart;
                const double shift = side == 0 ? config.delta : -config.delta;
                if (j < config.K - 1)
                    probe.theta[j] += shift;
                else
                    probe.phi[j - (config.K - 1)] += shift;
                const double p_reflect = reflection_prob(probe);
                rng::Stream s = ke.child(2 * j + side).stream();
                std::int64_t errors = 0;
                for (std::int64_t i = 0; i < config.trials_per_epoch; ++i)
                    if (s.bernoulli(p_reflect)) ++errors;
                est[side] = static_cast<double>(errors) / config.trials_per_epoch;
                lost += errors;
                total += config.trials_per_epoch;
                var_floor += est[side] * (1.0 - est[side]) /
                             (config.trials_per_epoch * 4.0 * config.delta * config.delta);
            }
            grad[j] = (est[0] - est[1]) / (2.0 * config.delta);
        }

        rec.photons_lost = lost;
        rec.trials = total;
        rec.eps_sampled = static_cast<double>(lost) / total;
        rec.energy_per_trial = static_cast<double>(lost) / total;
        result.records.push_back(rec);

        double grad_norm2 = 0.0;
        for (double gj : grad) grad_norm2 += gj * gj;
        for (int j = 0; j < n_free; ++j) {
            if (j < config.K - 1)
                chart.theta[j] -= config.eta * grad[j];
            else
                chart.phi[j - (config.K - 1)] -= config.eta * grad[j];
        }
        result.states.push_back(ModeLearnState{detail::gauge_fixed(chart.coefficients())});

        stall_run = grad_norm2 <= 0.0625 * var_floor ? stall_run + 1 : 0;
        if (stall_run >= config.stall_window) {
            result.final_state = result.states.back();
            result.status = TrainStatus::Stalled;
            return result;
        }
    }
    result.final_state = ModeLearnState{detail::gauge_fixed(chart.coefficients())};
    result.status = TrainStatus::Completed;
    return result;
}

struct EnergyReport {
    std::vector<double> energy_per_trial;  // quanta, per epoch
    std::int64_t cumulative_quanta = 0;
    std::int64_t total_trials = 0;
    double first_epoch = 0.0;
    double final_epoch = 0.0;
    double reduction_ratio = 0.0;          // first/final; inf when final is 0
    double final_joules_per_trial = std::numeric_limits<double>::quiet_NaN();
};

/// Summarize the dissipation ledger of a training run; with a device spec the
/// final per-trial cost is also priced in joules (hbar omega_a per quantum).
inline EnergyReport energy_report(std::span<const QuantumEpochRecord> records,
                                  const raman::RamanDeviceSpec* device = nullptr) {
    if (records.empty()) throw std::invalid_argument("energy_report: no records");
    EnergyReport rep;
    rep.energy_per_trial.reserve(records.size());
    for (const auto& r : records) {
        rep.energy_per_trial.push_back(r.energy_per_trial);
        rep.cumulative_quanta += r.photons_lost;
        rep.total_trials += r.trials;
    }
    rep.first_epoch = records.front().energy_per_trial;
    rep.final_epoch = records.back().energy_per_trial;
    rep.reduction_ratio = rep.final_epoch > 0.0
                              ? rep.first_epoch / rep.final_epoch
                              : std::numeric_limits<double>::infinity();
    if (device) rep.final_joules_per_trial = rep.final_epoch * device->photon_energy_joules();
    return rep;
}

}  // namespace photoperceptron::quantum
