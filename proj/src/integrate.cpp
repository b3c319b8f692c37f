#include "memsim/integrate.hpp"
#include "memsim/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace memsim {

namespace {

bool all_finite(const std::vector<double>& y) {
    for (double v : y) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace

Trace integrate(const EmulatorConfig& cfg, const SourceSpec& src, double t_end, double dt,
                AuxTrace* aux) {
    if (!(dt > 0.0)) throw ConfigError("integrate: dt must be > 0");
    if (!(t_end >= 100.0 * dt)) throw ConfigError("integrate: t_end must cover at least 100 steps");
    src.validate();
    validate_for_run(cfg, 2.0 * 3.141592653589793 * source_max_frequency(src));

    const EmulatorRealization real(cfg, dt);
    const std::size_t n = real.state_size();
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));

    std::vector<double> y(n, 0.0), yt(n), k1(n), k2(n), k3(n), k4(n);

    Trace trace;
    trace.dt = dt;
    trace.source_desc = source_describe(src);
    trace.reserve(steps + 1);
    if (aux) {
        aux->vinb.reserve(steps + 1);
        aux->vb3.reserve(steps + 1);
    }

    auto record = [&](double t, double vin) {
        const RhsOutputs out = real.outputs(vin, y);
        trace.push(t, vin, y[0], y[1], y[2], out.current, out.linv);
        if (aux) {
            aux->vinb.push_back(out.vinb);
            aux->vb3.push_back(out.vb3);
        }
    };

    record(0.0, source_eval(src, 0.0));

    for (std::size_t step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const double th = t + 0.5 * dt;
        const double t1 = t + dt;
        const double v0 = source_eval(src, t);
        const double vh = source_eval(src, th);
        const double v1 = source_eval(src, t1);

        real.rhs(v0, y, k1);
        for (std::size_t j = 0; j < n; ++j) yt[j] = y[j] + 0.5 * dt * k1[j];
        real.rhs(vh, yt, k2);
        for (std::size_t j = 0; j < n; ++j) yt[j] = y[j] + 0.5 * dt * k2[j];
        real.rhs(vh, yt, k3);
        for (std::size_t j = 0; j < n; ++j) yt[j] = y[j] + dt * k3[j];
        real.rhs(v1, yt, k4);
        for (std::size_t j = 0; j < n; ++j) {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }

        if (!all_finite(y)) {
            throw NumericError("integrate: state left finite range at step " +
                               std::to_string(step + 1) + " (t = " + std::to_string(t1) + " s)");
        }
        record(t1, v1);
    }
    return trace;
}

} // namespace memsim
