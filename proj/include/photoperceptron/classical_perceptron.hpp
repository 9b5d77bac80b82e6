#pragma once

// Two-state thermally activated perceptron: sigmoidal switch probability,
// epoch sampling, the gradient-descent feedback rule
// dw = beta nT x (1 - nbar^2)/4, and the first-order error-change prediction
// deps = -beta^2 (1 - nbar^2)^2 / 16, with epoch-level heat accounting.
//
// Backends for the switch: the exact sigmoid (infinite-trials surrogate),
// Bernoulli sampling of the sigmoid, and the physical Langevin double well.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "photoperceptron/langevin_thermo.hpp"
#include "photoperceptron/rng.hpp"
#include "photoperceptron/thermo_ledger.hpp"

namespace photoperceptron::classical {

struct ThermoConfig {
    double beta = 1.0;

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw std::invalid_argument("ThermoConfig: beta must be finite and > 0");
    }
    double temperature() const { return 1.0 / beta; }  // k_B = 1
};

struct Datum {
    int x = 1;         // encoded input, x = 2y - 1
    int n_target = 1;  // target output

    void validate() const {
        if ((x != 1 && x != -1) || (n_target != 1 && n_target != -1))
            throw std::invalid_argument("Datum: x and n_target must be +-1");
    }
};

enum class BooleanTask { Not, Copy };
enum class SwitchBackend { ExactSigmoid, SampledSigmoid, LangevinDoubleWell };

struct EpochStats {
    double w = 0.0;
    double eps_sampled = 0.0;
    double eps_exact = 0.0;
    double n_sampled = 0.0;
    double n_exact = 0.0;
    double delta_w = 0.0;
    std::int64_t trials = 0;
    double heat = 0.0;  // dissipated this epoch, k_B T units
};

using TrainingTrace = std::vector<EpochStats>;

struct TrainingConfig {
    double beta = 1.0;
    double sigma_init = 1.0;
    int epochs = 1;
    std::int64_t trials_per_epoch = 1;
    std::uint64_t seed = 0;
    BooleanTask task = BooleanTask::Not;
    double learning_rate = 1.0;  // extra gain on the feedback rule; 1 = verbatim

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw std::invalid_argument("TrainingConfig: beta must be finite and > 0");
        if (!(sigma_init > 0.0)) throw std::invalid_argument("TrainingConfig: sigma_init must be > 0");
        if (epochs < 1 || trials_per_epoch < 1)
            throw std::invalid_argument("TrainingConfig: epochs and trials_per_epoch must be >= 1");
    }
};

/// Parameters of the physical switch backend.
struct LangevinBackendConfig {
    langevin::DoubleWellSpec spec{};
    double window = 0.0;      // hold time after the ramp; default 4 natural times
    double equil_time = 0.0;  // defaults per switch_trial
    double ramp_time = 0.0;
    double dt = 0.0;
};

/// Total bias acting on the particle, A(w, x) = x w.
inline double activation(double w, int x) { return static_cast<double>(x) * w; }

/// Thermal switching probability p = (1 + exp(-beta A))^-1, evaluated on the
/// stable branch so |beta A| ~ 1e3 neither overflows nor loses saturation.
inline double switch_probability(double beta, double a) {
    if (!std::isfinite(beta) || !std::isfinite(a))
        throw std::invalid_argument("switch_probability: non-finite input");
    if (!(beta > 0.0)) throw std::invalid_argument("switch_probability: beta must be > 0");
    const double z = beta * a;
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// One two-state draw: +1 (right well) with probability p.
inline int sample_switch(rng::Stream& stream, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_switch: p outside [0,1]");
    return stream.bernoulli(p) ? 1 : -1;
}

/// Feedback rule: dw = beta nT x (1 - nbar^2)/4.
inline double weight_update(double beta, int x, int n_target, double nbar) {
    if (!(nbar >= -1.0 && nbar <= 1.0))
        throw std::invalid_argument("weight_update: nbar outside [-1,1]");
    return beta * n_target * x * (1.0 - nbar * nbar) / 4.0;
}

/// First-order error change under the feedback rule:
/// deps = -beta^2 (1 - nbar^2)^2 / 16 (always <= 0).
inline double predicted_error_change(double beta, double nbar) {
    if (!(nbar >= -1.0 && nbar <= 1.0))
        throw std::invalid_argument("predicted_error_change: nbar outside [-1,1]");
    const double q = 1.0 - nbar * nbar;
    return -beta * beta * q * q / 16.0;
}

inline double exact_mean_output(double beta, double w, int x) {
    return 2.0 * switch_probability(beta, activation(w, x)) - 1.0;
}

inline double exact_mean_error(double beta, double w, const Datum& d) {
    return 0.5 * (1.0 - d.n_target * exact_mean_output(beta, w, d.x));
}

/// Sample `trials` switches at fixed weight. Per-trial error (n - nT)^2/4.
/// A trial dissipates |A| (k_B T / beta units -> beta|A| in k_B T) when the
/// switch lands in the well favored by the bias; otherwise nothing.
/// Trial i draws from key.child(i), so epochs parallelize deterministically.
inline EpochStats epoch(rng::Key key, double w, const Datum& datum, std::int64_t trials,
                        double beta) {
    datum.validate();
    if (trials < 1) throw std::invalid_argument("epoch: trials must be >= 1");
    const double a = activation(w, datum.x);
    const double p = switch_probability(beta, a);

    std::int64_t n_plus = 0;
    std::int64_t n_favored = 0;
    for (std::int64_t i = 0; i < trials; ++i) {
        rng::Stream s = key.child(i).stream();
        const int n = sample_switch(s, p);
        if (n == 1) ++n_plus;
        if ((a > 0.0 && n == 1) || (a < 0.0 && n == -1)) ++n_favored;
    }

    EpochStats st;
    st.w = w;
    st.trials = trials;
    st.n_sampled = (2.0 * n_plus - trials) / static_cast<double>(trials);
    st.n_exact = 2.0 * p - 1.0;
    st.eps_sampled = 0.5 * (1.0 - datum.n_target * st.n_sampled);
    st.eps_exact = 0.5 * (1.0 - datum.n_target * st.n_exact);
    st.heat = beta * std::abs(a) * n_favored;  // k_B T units
    return st;
}

/// NOT -> n_target = -x, COPY -> n_target = +x, x uniform on {-1, +1}.
inline std::vector<Datum> boolean_dataset(BooleanTask task, std::int64_t n, rng::Stream& stream) {
    if (n < 1) throw std::invalid_argument("boolean_dataset: n must be >= 1");
    std::vector<Datum> out(n);
    for (auto& d : out) {
        d.x = stream.bernoulli(0.5) ? 1 : -1;
        d.n_target = task == BooleanTask::Not ? -d.x : d.x;
    }
    return out;
}

struct TrainingResult {
    TrainingTrace trace;
    thermo::ThermoLedger ledger;
    double final_w = 0.0;
};

/// Epoch-based training with the feedback rule.  One datum per epoch, drawn
/// uniformly; w0 ~ Gaussian(0, sigma_init^2).  The trace records every epoch.
inline TrainingResult train(const TrainingConfig& config, SwitchBackend backend,
                            const LangevinBackendConfig& lb = {}) {
    config.validate();
    const rng::Key root = rng::root_key(config.seed, "classical_perceptron");
    rng::Stream init = root.child(0).stream();
    double w = config.sigma_init * init.normal();

    TrainingResult result;
    result.trace.reserve(config.epochs);

    langevin::DoubleWellSpec lspec = lb.spec;
    double window = lb.window;
    if (backend == SwitchBackend::LangevinDoubleWell) {
        lspec.beta = config.beta;  // the bath temperature is the config's
        lspec.validate();
        if (window <= 0.0) window = 4.0 * lspec.natural_time();
    }

    for (int e = 0; e < config.epochs; ++e) {
        const rng::Key ke = root.child(1 + e);
        rng::Stream pick = ke.child(0).stream();
        Datum d;
        d.x = pick.bernoulli(0.5) ? 1 : -1;
        d.n_target = config.task == BooleanTask::Not ? -d.x : d.x;

        EpochStats st;
        if (backend == SwitchBackend::ExactSigmoid) {
            const double a = activation(w, d.x);
            const double p = switch_probability(config.beta, a);
            st.w = w;
            st.trials = config.trials_per_epoch;
            st.n_exact = st.n_sampled = 2.0 * p - 1.0;
            st.eps_exact = st.eps_sampled = 0.5 * (1.0 - d.n_target * st.n_exact);
            const double p_fav = a > 0.0 ? p : (a < 0.0 ? 1.0 - p : 0.0);
            st.heat = config.beta * std::abs(a) * p_fav * config.trials_per_epoch;
        } else if (backend == SwitchBackend::SampledSigmoid) {
            st = epoch(ke.child(1), w, d, config.trials_per_epoch, config.beta);
        } else {
            const double a = activation(w, d.x);
            std::int64_t n_plus = 0;
            double q_sum = 0.0;
            for (std::int64_t i = 0; i < config.trials_per_epoch; ++i) {
                rng::Stream s = ke.child(1).child(i).stream();
                const auto trial = langevin::switch_trial(s, lspec, a, window, lb.equil_time,
                                                          lb.ramp_time, lb.dt);
                if (trial.n == 1) ++n_plus;
                q_sum += trial.heat;
            }
            st.w = w;
            st.trials = config.trials_per_epoch;
            st.n_sampled =
                (2.0 * n_plus - config.trials_per_epoch) / static_cast<double>(config.trials_per_epoch);
            st.n_exact = exact_mean_output(config.beta, w, d.x);
            st.eps_sampled = 0.5 * (1.0 - d.n_target * st.n_sampled);
            st.eps_exact = 0.5 * (1.0 - d.n_target * st.n_exact);
            st.heat = config.beta * q_sum;  // trajectory heat, k_B T units
        }

        st.delta_w = config.learning_rate *
                     weight_update(config.beta, d.x, d.n_target, st.n_sampled);
        result.ledger.add_heat(st.heat, st.trials);
        w += st.delta_w;
        result.trace.push_back(st);
    }
    result.final_w = w;
    return result;
}

}  // namespace photoperceptron::classical
