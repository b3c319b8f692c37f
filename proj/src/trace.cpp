#include "memsim/trace.hpp"
#include "memsim/errors.hpp"

#include <cmath>
#include <string>

namespace memsim {

void Trace::reserve(std::size_t n) {
    t.reserve(n);
    vin.reserve(n);
    phi.reserve(n);
    rho.reserve(n);
    q.reserve(n);
    i.reserve(n);
    linv.reserve(n);
}

void Trace::push(double t_, double vin_, double phi_, double rho_, double q_, double i_, double linv_) {
    t.push_back(t_);
    vin.push_back(vin_);
    phi.push_back(phi_);
    rho.push_back(rho_);
    q.push_back(q_);
    i.push_back(i_);
    linv.push_back(linv_);
}

Trace Trace::slice(std::size_t begin, std::size_t count) const {
    Trace out;
    out.dt = dt;
    out.config_hash = config_hash;
    out.source_desc = source_desc;
    out.reserve(count);
    for (std::size_t k = begin; k < begin + count; ++k) {
        out.push(t[k], vin[k], phi[k], rho[k], q[k], i[k], linv[k]);
    }
    return out;
}

Trace steady_window(const Trace& trace, double f, int n_periods) {
    if (!(f > 0.0) || n_periods < 1) {
        throw ConfigError("steady_window: need f > 0 and n_periods >= 1");
    }
    const double period = 1.0 / f;
    const auto samples_per_period = static_cast<std::size_t>(std::llround(period / trace.dt));
    const std::size_t want = static_cast<std::size_t>(n_periods) * samples_per_period;
    const double span = trace.dt * static_cast<double>(trace.size() - 1);
    if (samples_per_period < 4 || span < (n_periods + 2) * period) {
        throw NumericError("steady_window: trace shorter than (n_periods + 2) periods");
    }

    // Latest upward phi crossing that still leaves a full window.
    const std::size_t last_start = trace.size() - want;
    for (std::size_t k = last_start; k-- > 0;) {
        if (trace.phi[k] <= 0.0 && trace.phi[k + 1] > 0.0) {
            // Start on whichever bracketing sample sits closer to the crossing.
            const std::size_t start =
                (std::fabs(trace.phi[k]) <= std::fabs(trace.phi[k + 1])) ? k : k + 1;
            if (start + want <= trace.size()) {
                return trace.slice(start, want);
            }
        }
    }
    throw NumericError("steady_window: no upward phi zero crossing found");
}

} // namespace memsim
