#include "memsim/network.hpp"
#include "memsim/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace memsim {

Trace simulate_parallel(const CompositeSpec& spec, double t_end, double dt) {
    if (spec.wiring != Wiring::ParallelSamePolarity) {
        throw ConfigError("simulate_parallel: spec is not wired in parallel");
    }
    if (!(dt > 0.0) || !(t_end >= 100.0 * dt)) {
        throw ConfigError("simulate_parallel: need dt > 0 and t_end >= 100*dt");
    }
    spec.drive.validate();
    const double omega_max = 2.0 * 3.141592653589793 * source_max_frequency(spec.drive);

    std::array<EmulatorRealization, 2> real{
        EmulatorRealization(spec.elements[0], dt),
        EmulatorRealization(spec.elements[1], dt)};
    for (const auto& cfg : spec.elements) validate_for_run(cfg, omega_max);

    // Branch states live side by side and never couple; each branch sees
    // exactly the arithmetic of a standalone run.
    const std::array<std::size_t, 2> n{real[0].state_size(), real[1].state_size()};
    std::array<std::vector<double>, 2> y, yt, k1, k2, k3, k4;
    for (int e = 0; e < 2; ++e) {
        y[e].assign(n[e], 0.0);
        yt[e].resize(n[e]);
        k1[e].resize(n[e]);
        k2[e].resize(n[e]);
        k3[e].resize(n[e]);
        k4[e].resize(n[e]);
    }

    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    Trace trace;
    trace.dt = dt;
    trace.source_desc = source_describe(spec.drive);
    trace.reserve(steps + 1);

    auto record = [&](double t, double vin) {
        const RhsOutputs o0 = real[0].outputs(vin, y[0]);
        const RhsOutputs o1 = real[1].outputs(vin, y[1]);
        trace.push(t, vin, y[0][0], y[0][1], y[0][2] + y[1][2],
                   o0.current + o1.current, o0.linv + o1.linv);
    };

    record(0.0, source_eval(spec.drive, 0.0));
    for (std::size_t step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const double v0 = source_eval(spec.drive, t);
        const double vh = source_eval(spec.drive, t + 0.5 * dt);
        const double v1 = source_eval(spec.drive, t + dt);
        for (int e = 0; e < 2; ++e) {
            real[e].rhs(v0, y[e], k1[e]);
            for (std::size_t j = 0; j < n[e]; ++j) yt[e][j] = y[e][j] + 0.5 * dt * k1[e][j];
            real[e].rhs(vh, yt[e], k2[e]);
            for (std::size_t j = 0; j < n[e]; ++j) yt[e][j] = y[e][j] + 0.5 * dt * k2[e][j];
            real[e].rhs(vh, yt[e], k3[e]);
            for (std::size_t j = 0; j < n[e]; ++j) yt[e][j] = y[e][j] + dt * k3[e][j];
            real[e].rhs(v1, yt[e], k4[e]);
            for (std::size_t j = 0; j < n[e]; ++j) {
                y[e][j] += dt / 6.0 * (k1[e][j] + 2.0 * k2[e][j] + 2.0 * k3[e][j] + k4[e][j]);
            }
            for (double v : y[e]) {
                if (!std::isfinite(v)) {
                    throw NumericError("simulate_parallel: non-finite state at step " +
                                       std::to_string(step + 1));
                }
            }
        }
        record(t + dt, v1);
    }
    return trace;
}

Trace simulate_series(const CompositeSpec& spec, double t_end, double dt) {
    if (spec.wiring != Wiring::SeriesSamePolarity) {
        throw ConfigError("simulate_series: spec is not wired in series");
    }
    if (!(dt > 0.0) || !(t_end >= 100.0 * dt)) {
        throw ConfigError("simulate_series: need dt > 0 and t_end >= 100*dt");
    }
    for (const auto& cfg : spec.elements) {
        if (cfg.fidelity != Fidelity::Simplified) {
            throw ConfigError("simulate_series: elements must use the Simplified tier "
                              "(flux is solved explicitly from the product law)");
        }
        cfg.validate();
    }
    spec.drive.validate();

    std::array<Coefficients, 2> c{derive_coefficients(spec.elements[0]),
                                  derive_coefficients(spec.elements[1])};

    auto linv_of = [&](int e, double rho) { return c[e].a + c[e].mode_sign * c[e].b * rho; };
    auto flux_of = [&](int e, double current, double rho, double t) {
        const double linv = linv_of(e, rho);
        if (!(std::fabs(linv) > 1e-12 * c[e].a) || linv <= 0.0) {
            throw NumericError("simulate_series: element " + std::to_string(e + 1) +
                               " inverse meminductance crossed zero at t = " + std::to_string(t) +
                               " s (rho = " + std::to_string(rho) + " Wb*s)");
        }
        return current / linv;
    };

    // States: rho1, rho2, q.  d rho_i/dt = phi_i = I/Linv_i, dq/dt = I.
    std::array<double, 3> y{0.0, 0.0, 0.0};
    auto rhs = [&](double t, const std::array<double, 3>& s, std::array<double, 3>& ds) {
        const double current = source_eval(spec.drive, t);
        ds[0] = flux_of(0, current, s[0], t);
        ds[1] = flux_of(1, current, s[1], t);
        ds[2] = current;
    };

    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    Trace trace;
    trace.dt = dt;
    trace.source_desc = source_describe(spec.drive);
    trace.reserve(steps + 1);

    const double a_comp = 1.0 / (1.0 / c[0].a + 1.0 / c[1].a);
    auto record = [&](double t) {
        const double current = source_eval(spec.drive, t);
        const double didt = source_eval_derivative(spec.drive, t);
        double phi_total = 0.0, v_total = 0.0;
        for (int e = 0; e < 2; ++e) {
            const double linv = linv_of(e, y[e]);
            const double phi_e = flux_of(e, current, y[e], t);
            phi_total += phi_e;
            // v_e = d/dt (I/Linv) with dLinv/dt = mode_sign*b*phi_e
            v_total += didt / linv - current * c[e].mode_sign * c[e].b * phi_e / (linv * linv);
        }
        const double linv_comp = (phi_total != 0.0) ? current / phi_total : a_comp;
        trace.push(t, v_total, phi_total, y[0] + y[1], y[2], current, linv_comp);
    };

    record(0.0);
    std::array<double, 3> yt{}, k1{}, k2{}, k3{}, k4{};
    for (std::size_t step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        rhs(t, y, k1);
        for (int j = 0; j < 3; ++j) yt[j] = y[j] + 0.5 * dt * k1[j];
        rhs(t + 0.5 * dt, yt, k2);
        for (int j = 0; j < 3; ++j) yt[j] = y[j] + 0.5 * dt * k2[j];
        rhs(t + 0.5 * dt, yt, k3);
        for (int j = 0; j < 3; ++j) yt[j] = y[j] + dt * k3[j];
        rhs(t + dt, yt, k4);
        for (int j = 0; j < 3; ++j) {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            if (!std::isfinite(y[j])) {
                throw NumericError("simulate_series: non-finite state at step " +
                                   std::to_string(step + 1));
            }
        }
        record(t + dt);
    }
    return trace;
}

} // namespace memsim
