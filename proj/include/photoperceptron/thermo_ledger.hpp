#pragma once

// Cumulative energy accounting shared by the classical and quantum learning
// loops.  Heat is tracked in k_B T units; photon losses in quanta of
// hbar*omega_a (converted to joules only at report time).

#include <cstdint>

namespace photoperceptron::thermo {

struct ThermoLedger {
    double heat_kbt = 0.0;           // cumulative dissipated heat, k_B T units
    std::int64_t photons_lost = 0;   // cumulative lost quanta
    std::int64_t trials = 0;         // trials accounted for

    void add_heat(double q_kbt, std::int64_t n_trials) {
        heat_kbt += q_kbt;
        trials += n_trials;
    }
    void add_photons(std::int64_t lost, std::int64_t n_trials) {
        photons_lost += lost;
        trials += n_trials;
    }
    double heat_per_trial() const { return trials > 0 ? heat_kbt / trials : 0.0; }
    double quanta_per_trial() const {
        return trials > 0 ? static_cast<double>(photons_lost) / trials : 0.0;
    }
};

}  // namespace photoperceptron::thermo
