#pragma once

// Deterministic text formatting for the CSV artifacts.  Doubles are written
// with shortest round-trip formatting (std::to_chars), so identical runs
// produce byte-identical files.

#include <charconv>
#include <cstdint>
#include <string>

#include "photoperceptron/temporal_modes.hpp"

namespace photoperceptron::csv {

inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string fmt(std::int64_t v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }

/// TemporalMode serialization: `t,re,im` with the grid parameters in the header.
inline std::string mode_csv(const modes::TemporalMode& m, const std::string& meta = {}) {
    std::string out;
    out.reserve(64 * m.grid.n_points);
    if (!meta.empty()) out += meta;
    out += "# grid t_min=" + fmt(m.grid.t_min) + " t_max=" + fmt(m.grid.t_max) +
           " n_points=" + fmt(m.grid.n_points) + "\n";
    out += "t,re,im\n";
    for (int k = 0; k < m.grid.n_points; ++k) {
        out += fmt(m.grid.time_at(k));
        out += ',';
        out += fmt(m.amplitude[k].real());
        out += ',';
        out += fmt(m.amplitude[k].imag());
        out += '\n';
    }
    return out;
}

}  // namespace photoperceptron::csv
