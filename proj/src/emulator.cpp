#include "memsim/emulator.hpp"
#include "memsim/errors.hpp"

#include <cmath>
#include <string>

namespace memsim {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// First-order stages whose pole exceeds this multiple of the sample rate are
// treated as instantaneous by the realization (explicit RK4 would otherwise
// leave its stability region long before the stage contributes anything).
constexpr double kStiffLimit = 2.0;

// Non-ideal aux state layout (offsets into MeminductorState::aux).
enum NonIdealAux : std::size_t {
    kVb3 = 0,    // OTA3 bias node, fed by the filtered OTA4 current
    kI4Lp = 1,   // OTA4 output current after the omega_a roll-off
    kI4Pd = 2,   // OTA4 Pade delay state
    kI3Lp = 3,   // OTA3 output current after the omega_a roll-off
    kI3Pd = 4,   // OTA3 Pade delay state
    kVBeta = 5,  // conveyor voltage-transfer pole state
    kVAlpha = 6, // conveyor current-transfer pole state
    kNonIdealAuxCount = 7
};

bool stage_bypassed(double pole, double dt_hint) {
    return dt_hint > 0.0 && pole * dt_hint > kStiffLimit;
}

} // namespace

void EmulatorConfig::validate() const {
    if (!(R1 > 0.0 && C1 > 0.0 && C2 > 0.0)) {
        throw ConfigError("EmulatorConfig: R1, C1, C2 must be > 0");
    }
    ota3.validate();
    ota4.validate();
    ccii1.validate();
    cccii2.validate();
}

void set_rx_from_bias(CcciiParams& p, double Ib, const MosPair& pair) {
    p.Rx = cccii_rx(Ib, pair);
}

Coefficients derive_coefficients(const EmulatorConfig& cfg) {
    const double gm4 = ota_gm(cfg.ota4);
    Coefficients c;
    c.a = cfg.ota3.k * (-cfg.ota3.Vss - 2.0 * cfg.ota3.Vth) / (kSqrt2 * cfg.R1 * cfg.C2);
    c.b = cfg.ota3.k * gm4 / (kSqrt2 * cfg.C1 * cfg.R1 * cfg.R1 * cfg.C2 * cfg.C2);
    c.mode_sign = (cfg.mode == Mode::Incremental) ? 1.0 : -1.0;
    return c;
}

void validate_for_run(const EmulatorConfig& cfg, double omega_max) {
    cfg.validate();
    if (cfg.topology == Topology::Floating && cfg.fidelity != Fidelity::Simplified) {
        if (!(omega_max > 0.0)) throw ConfigError("validate_for_run: omega_max must be > 0");
        const double bound = cfg.cccii2.Rx + 1.0 / (omega_max * cfg.C2);
        if (!(cfg.R1 < bound)) {
            throw ConfigError("floating emulator unstable at the configured bandwidth: "
                              "R1 must stay below Rx2 + 1/(omega_max*C2)");
        }
    }
}

// -----------------------------------------------------------------------------
// EmulatorRealization
// -----------------------------------------------------------------------------

EmulatorRealization::EmulatorRealization(const EmulatorConfig& cfg, double dt_hint)
    : cfg_(cfg) {
    cfg_.validate();
    coeff_ = derive_coefficients(cfg_);

    g3k_ = cfg_.ota3.k / kSqrt2;
    base3_ = -cfg_.ota3.Vss - 2.0 * cfg_.ota3.Vth;
    gm4_ = ota_gm(cfg_.ota4);
    rp_ = (cfg_.topology == Topology::Grounded) ? cfg_.cccii2.Rx : cfg_.cccii2.Rx - cfg_.R1;
    inv_r1c2_ = 1.0 / (cfg_.R1 * cfg_.C2);

    switch (cfg_.fidelity) {
    case Fidelity::Simplified:
        aux_count_ = 0;
        break;
    case Fidelity::FullIdeal:
        aux_count_ = 1;  // integral of VinB; VB3 = Gm4 * aux / C1
        break;
    case Fidelity::NonIdeal:
        aux_count_ = kNonIdealAuxCount;
        bypass_g3_ = stage_bypassed(cfg_.ota3.omega_a, dt_hint);
        bypass_g4_ = stage_bypassed(cfg_.ota4.omega_a, dt_hint);
        bypass_beta_ = stage_bypassed(cfg_.cccii2.omega_beta, dt_hint);
        bypass_alpha_ = stage_bypassed(cfg_.cccii2.omega_alpha, dt_hint);
        pade3_ = cfg_.ota3.tau > 0.0 && !stage_bypassed(2.0 / cfg_.ota3.tau, dt_hint);
        pade4_ = cfg_.ota4.tau > 0.0 && !stage_bypassed(2.0 / cfg_.ota4.tau, dt_hint);
        shunt_g_ = 1.0 / cfg_.ota3.Ro;
        break;
    }
}

EmulatorRealization::PortSolution
EmulatorRealization::solve_port(double vin, std::span<const double> y) const {
    const double phi = y[0];
    const double flux_term = phi * inv_r1c2_;
    const double w = rp_ / cfg_.R1;
    const double rx1 = cfg_.ccii1.Rx;
    const double ms = coeff_.mode_sign;

    const double vb3 = y[3 + kVb3];
    const double g3_raw = g3k_ * (base3_ + ms * vb3);

    // Port current as I = c0 + c1 * VinB_eff, then close the input loop.
    double c0, c1;
    if (!bypass_g3_) {
        const double y3 = y[3 + kI3Lp];
        c0 = pade3_ ? (2.0 * y[3 + kI3Pd] - y3) : y3;
        c1 = shunt_g_;
    } else if (pade3_) {
        c0 = 2.0 * y[3 + kI3Pd];
        c1 = shunt_g_ - g3_raw;
    } else {
        c0 = 0.0;
        c1 = shunt_g_ + g3_raw;
    }

    PortSolution sol{};
    if (!bypass_alpha_) {
        sol.vinb_eff = y[3 + kVAlpha];
        sol.current = c0 + c1 * sol.vinb_eff;
    } else if (!bypass_beta_) {
        sol.vinb_eff = cfg_.cccii2.alpha0 * y[3 + kVBeta];
        sol.current = c0 + c1 * sol.vinb_eff;
    } else {
        // Both conveyor poles instantaneous: VinB depends on the port
        // current through the Rx1 drop, a single linear equation in I.
        const double gba = cfg_.cccii2.alpha0 * cfg_.cccii2.beta0;
        const double drive = gba * (flux_term + w * vin);
        sol.current = (c0 + c1 * drive) / (1.0 + c1 * gba * w * rx1);
        sol.vinb_eff = drive - gba * w * rx1 * sol.current;
    }
    sol.vinb_raw = flux_term + w * (vin - rx1 * sol.current);
    sol.beta_out = bypass_beta_ ? cfg_.cccii2.beta0 * sol.vinb_raw : y[3 + kVBeta];
    return sol;
}

void EmulatorRealization::rhs(double vin, std::span<const double> y, std::span<double> dy) const {
    const double phi = y[0];
    const double rho = y[1];
    const double ms = coeff_.mode_sign;

    dy[0] = vin;  // dphi/dt
    dy[1] = phi;  // drho/dt

    switch (cfg_.fidelity) {
    case Fidelity::Simplified: {
        dy[2] = (coeff_.a + ms * coeff_.b * rho) * phi;
        return;
    }
    case Fidelity::FullIdeal: {
        const double vinb = phi * inv_r1c2_ + (rp_ / cfg_.R1) * vin;
        const double vb3 = gm4_ * y[3] / cfg_.C1;
        dy[2] = g3k_ * (base3_ + ms * vb3) * vinb;
        dy[3] = vinb;
        return;
    }
    case Fidelity::NonIdeal: {
        const PortSolution sol = solve_port(vin, y);
        dy[2] = sol.current;

        // OTA4 branch charging C1
        const double u4 = gm4_ * sol.vinb_eff;
        double y4_eff;
        if (bypass_g4_) {
            y4_eff = u4;
            dy[3 + kI4Lp] = 0.0;
        } else {
            y4_eff = y[3 + kI4Lp];
            dy[3 + kI4Lp] = cfg_.ota4.omega_a * (u4 - y4_eff);
        }
        double i4_out = y4_eff;
        if (pade4_) {
            i4_out = 2.0 * y[3 + kI4Pd] - y4_eff;
            dy[3 + kI4Pd] = (2.0 / cfg_.ota4.tau) * (y4_eff - y[3 + kI4Pd]);
        } else {
            dy[3 + kI4Pd] = 0.0;
        }
        dy[3 + kVb3] = i4_out / cfg_.C1;

        // OTA3 branch driving the port
        const double g3_raw = g3k_ * (base3_ + ms * y[3 + kVb3]);
        const double u3 = g3_raw * sol.vinb_eff;
        double y3_eff;
        if (bypass_g3_) {
            y3_eff = u3;
            dy[3 + kI3Lp] = 0.0;
        } else {
            y3_eff = y[3 + kI3Lp];
            dy[3 + kI3Lp] = cfg_.ota3.omega_a * (u3 - y3_eff);
        }
        dy[3 + kI3Pd] = pade3_ ? (2.0 / cfg_.ota3.tau) * (y3_eff - y[3 + kI3Pd]) : 0.0;

        // Conveyor transfer poles
        dy[3 + kVBeta] = bypass_beta_
            ? 0.0
            : cfg_.cccii2.omega_beta * (cfg_.cccii2.beta0 * sol.vinb_raw - y[3 + kVBeta]);
        dy[3 + kVAlpha] = bypass_alpha_
            ? 0.0
            : cfg_.cccii2.omega_alpha * (cfg_.cccii2.alpha0 * sol.beta_out - y[3 + kVAlpha]);
        return;
    }
    }
}

RhsOutputs EmulatorRealization::outputs(double vin, std::span<const double> y) const {
    const double phi = y[0];
    const double rho = y[1];
    const double ms = coeff_.mode_sign;

    RhsOutputs out;
    switch (cfg_.fidelity) {
    case Fidelity::Simplified:
        out.vinb = phi * inv_r1c2_;
        out.vb3 = gm4_ * rho / (cfg_.C1 * cfg_.R1 * cfg_.C2);
        out.linv = coeff_.a + ms * coeff_.b * rho;
        out.current = out.linv * phi;
        return out;
    case Fidelity::FullIdeal:
        out.vinb = phi * inv_r1c2_ + (rp_ / cfg_.R1) * vin;
        out.vb3 = gm4_ * y[3] / cfg_.C1;
        out.current = g3k_ * (base3_ + ms * out.vb3) * out.vinb;
        out.linv = (phi != 0.0) ? out.current / phi : coeff_.a;
        return out;
    case Fidelity::NonIdeal: {
        const PortSolution sol = solve_port(vin, y);
        out.vinb = sol.vinb_eff;
        out.vb3 = y[3 + kVb3];
        out.current = sol.current;
        out.linv = (phi != 0.0) ? out.current / phi : coeff_.a;
        return out;
    }
    }
    return out;
}

// -----------------------------------------------------------------------------
// eval_rhs — public wrapper around the flat realization
// -----------------------------------------------------------------------------

RhsResult eval_rhs(const MeminductorState& state, double vin, const EmulatorConfig& cfg) {
    const EmulatorRealization real(cfg);
    const std::size_t n = real.state_size();

    std::vector<double> y(n, 0.0), dy(n, 0.0);
    y[0] = state.phi;
    y[1] = state.rho;
    y[2] = state.q;
    if (!state.aux.empty()) {
        if (state.aux.size() != real.aux_count()) {
            throw ConfigError("eval_rhs: aux state size does not match the fidelity tier (expected " +
                              std::to_string(real.aux_count()) + ")");
        }
        for (std::size_t j = 0; j < state.aux.size(); ++j) y[3 + j] = state.aux[j];
    }

    real.rhs(vin, y, dy);

    RhsResult res;
    res.derivatives.t = 1.0;  // dt/dt
    res.derivatives.phi = dy[0];
    res.derivatives.rho = dy[1];
    res.derivatives.q = dy[2];
    res.derivatives.aux.assign(dy.begin() + 3, dy.end());
    res.outputs = real.outputs(vin, y);
    return res;
}

// -----------------------------------------------------------------------------
// Closed-form frequency-domain evaluators
// -----------------------------------------------------------------------------

std::complex<double> closed_form_linv(const EmulatorConfig& cfg, double omega,
                                      double phi_amplitude) {
    if (!(omega > 0.0)) throw ConfigError("closed_form_linv: omega must be > 0");
    cfg.validate();

    using cd = std::complex<double>;
    const cd s(0.0, omega);
    const Coefficients c = derive_coefficients(cfg);
    const double ms = c.mode_sign;
    const double g3k = cfg.ota3.k / kSqrt2;
    const double base3 = -cfg.ota3.Vss - 2.0 * cfg.ota3.Vth;
    const double gm4 = ota_gm(cfg.ota4);
    const double R1 = cfg.R1, C1 = cfg.C1, C2 = cfg.C2;
    const double rx2 = cfg.cccii2.Rx;

    if (cfg.fidelity == Fidelity::Simplified) {
        return c.a + ms * c.b * phi_amplitude / s;
    }

    if (cfg.fidelity == Fidelity::FullIdeal) {
        const cd conveyor = (cfg.topology == Topology::Grounded)
            ? (1.0 + s * C2 * rx2)
            : (1.0 + s * C2 * rx2 - s * C2 * R1);
        if (std::abs(conveyor) < 1e-12) {
            throw NumericError("closed_form_linv: singular conveyor denominator");
        }
        const cd d = g3k * base3 + ms * g3k * gm4 * conveyor * phi_amplitude / (s * C1 * R1 * C2);
        return d * conveyor / (R1 * C2);
    }

    // NonIdeal: gamma per OTA (high regime engages the excess-phase delay),
    // conveyor transfers from the configured poles, parasitic Zx in series.
    const auto regime3 = cfg.ota3.tau > 0.0 ? GammaRegime::High : GammaRegime::Low;
    const auto regime4 = cfg.ota4.tau > 0.0 ? GammaRegime::High : GammaRegime::Low;
    const cd g3 = ota_gamma(cfg.ota3, omega, regime3);
    const cd g4 = ota_gamma(cfg.ota4, omega, regime4);
    const cd zx1 = cfg.ccii1.Rx + s * cfg.ccii1.Lx;

    if (cfg.topology == Topology::Grounded) {
        const cd conveyor = 1.0 + s * C2 * rx2;
        const cd beta = ccii_transfer(cfg.ccii1.beta0, cfg.ccii1.omega_beta, omega) *
                        ccii_transfer(cfg.cccii2.beta0, cfg.cccii2.omega_beta, omega);
        const cd d = g3k * g3 * base3 +
                     ms * g3k * g3 * g4 * gm4 * conveyor * phi_amplitude / (s * C1 * R1 * C2);
        const cd z = zx1 + s * R1 * C2 * beta / (d * conveyor);
        if (std::abs(z) < 1e-30) throw NumericError("closed_form_linv: singular impedance");
        return s / z;
    }

    const cd beta = ccii_transfer(cfg.cccii2.beta0, cfg.cccii2.omega_beta, omega);
    const cd zx2 = rx2 + s * cfg.cccii2.Lx;
    const cd denom = 1.0 + beta * s * C2 * zx2 - beta * s * C2 * R1;
    if (std::abs(denom) < 1e-12) {
        throw NumericError("closed_form_linv: singular floating denominator");
    }
    const cd beta2 = zx1 * (1.0 + zx2 * beta * s * C2) / denom;
    const cd ideal_denom = 1.0 + s * C2 * rx2 - s * C2 * R1;
    const cd d = g3k * g3 / beta * base3 +
                 ms * g3k * g3 * g4 / beta * gm4 * ideal_denom * phi_amplitude / (s * C1 * R1 * C2);
    const cd z = beta2 + s * R1 * C2 / (d * denom);
    if (std::abs(z) < 1e-30) throw NumericError("closed_form_linv: singular impedance");
    return s / z;
}

} // namespace memsim
