#pragma once

// =============================================================================
// Meminductor emulator core: state-space realization of the grounded and
// floating topologies at three fidelity tiers, plus closed-form
// frequency-domain evaluators used as analysis cross-checks.
//
// Signal chain (grounded):
//   VinB = phi/(R1*C2) + (Rx2/R1)*vin          (conveyor integrator stage)
//   VB3  = (Gm4/C1) * integral(VinB)           (OTA4 charging C1)
//   I    = (k3/sqrt(2)) * ((-Vss3 - 2*Vth3) + mode_sign*VB3) * VinB
// The floating topology differs only in the feedthrough term:
//   Rp = Rx2 - R1 instead of Rx2.
//
// Sign convention: the inverse-meminductance baseline is written with
// (-Vss - 2*Vth), which is positive at the intended rails, so the constant
// coefficient `a` is positive whenever the OTAs stay in saturation. The
// incremental/decremental switch flips only the VB3 (time-varying) term.
// =============================================================================

#include "memsim/device_blocks.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace memsim {

enum class Topology : std::uint8_t { Grounded, Floating };
enum class Mode : std::uint8_t { Incremental, Decremental };

/// Simplified  — unity conveyor factor (pure product law)
/// FullIdeal   — keeps the Rx2 feedthrough of the conveyor stage
/// NonIdeal    — FullIdeal plus OTA roll-off poles, excess-phase delay
///               (Pade(1,1) stage), conveyor transfer poles, series Rx1
///               at the input and finite Ro shunting the port node.
enum class Fidelity : std::uint8_t { Simplified, FullIdeal, NonIdeal };

struct EmulatorConfig {
    Topology topology = Topology::Grounded;
    Mode mode = Mode::Incremental;
    Fidelity fidelity = Fidelity::Simplified;

    double R1 = 10.0;       ///< [ohm]
    double C1 = 75e-12;     ///< [F]
    double C2 = 150e-12;    ///< [F]

    OtaParams ota3;         ///< Gm3 stage (bias is the dynamic VB3 node)
    OtaParams ota4;         ///< Gm4 stage; ota4.Vb is the VB4 tuning knob
    CcciiParams ccii1;      ///< input conveyor (Rx1 matters in NonIdeal)
    CcciiParams cccii2;     ///< integrator conveyor (Rx2 carrier, set from Ib)

    void validate() const;
};

/// Set the conveyor's X-port resistance from a CCCII bias current.
void set_rx_from_bias(CcciiParams& p, double Ib, const MosPair& pair = MosPair{});

/// Coefficients of the simplified inverse meminductance
///   Linv = a + mode_sign * b * rho.
struct Coefficients {
    double a = 0.0;          ///< baseline [1/H]
    double b = 0.0;          ///< flux-integral sensitivity [1/(H*Wb*s)]
    double mode_sign = 1.0;  ///< +1 incremental, -1 decremental
};

/// a = k3*(-Vss3 - 2*Vth3) / (sqrt(2)*R1*C2)
/// b = k3*Gm4 / (sqrt(2)*C1*R1^2*C2^2),  Gm4 = ota_gm(ota4)
Coefficients derive_coefficients(const EmulatorConfig& cfg);

/// Integrator state. aux holds the tier-specific auxiliary scalars in the
/// layout reported by EmulatorRealization::aux_count().
struct MeminductorState {
    double t = 0.0;
    double phi = 0.0;   ///< integral of vin [Wb]
    double rho = 0.0;   ///< integral of phi [Wb*s]
    double q = 0.0;     ///< integral of current [C]
    std::vector<double> aux;
};

struct RhsOutputs {
    double current = 0.0;  ///< terminal current [A]
    double vinb = 0.0;     ///< conveyor stage output [V]
    double vb3 = 0.0;      ///< OTA3 bias node [V]
    double linv = 0.0;     ///< I/phi diagnostic (baseline a where phi == 0)
};

struct RhsResult {
    MeminductorState derivatives;  ///< d(state)/dt; aux sized like the input
    RhsOutputs outputs;
};

/// Pure right-hand side of the emulator ODE; see the header banner for the
/// realized chain per tier.
RhsResult eval_rhs(const MeminductorState& state, double vin, const EmulatorConfig& cfg);

// -----------------------------------------------------------------------------
// Flat-state realization used by the integrator. State layout:
//   y[0] = phi, y[1] = rho, y[2] = q, y[3..] = aux
// A realization built with dt_hint > 0 treats first-order stages whose pole
// cannot be resolved at that step (pole*dt > 2) as instantaneous, which keeps
// the explicit integrator inside its stability region; the affected stage is
// then algebraically exact in the ideal limit.
// -----------------------------------------------------------------------------
class EmulatorRealization {
public:
    explicit EmulatorRealization(const EmulatorConfig& cfg, double dt_hint = 0.0);

    std::size_t aux_count() const { return aux_count_; }
    std::size_t state_size() const { return 3 + aux_count_; }

    void rhs(double vin, std::span<const double> y, std::span<double> dy) const;
    RhsOutputs outputs(double vin, std::span<const double> y) const;

    const Coefficients& coefficients() const { return coeff_; }
    const EmulatorConfig& config() const { return cfg_; }

private:
    struct PortSolution {
        double current;
        double vinb_eff;
        double vinb_raw;
        double beta_out;
    };
    PortSolution solve_port(double vin, std::span<const double> y) const;

    EmulatorConfig cfg_;
    Coefficients coeff_;
    std::size_t aux_count_ = 0;

    // cached constants
    double g3k_ = 0.0;        // k3/sqrt(2)
    double base3_ = 0.0;      // -Vss3 - 2*Vth3
    double gm4_ = 0.0;
    double rp_ = 0.0;         // Rx2 (grounded) or Rx2 - R1 (floating)
    double inv_r1c2_ = 0.0;

    // non-ideal plan
    bool bypass_g3_ = false, bypass_g4_ = false;
    bool bypass_beta_ = false, bypass_alpha_ = false;
    bool pade3_ = false, pade4_ = false;
    double shunt_g_ = 0.0;    // 1/Ro of the OTA3 output stage
};

/// Closed-form inverse meminductance at s = j*omega with the flux phasor
/// treated as the given amplitude. Analysis cross-check only — never part
/// of time stepping. Throws NumericError on a singular floating denominator.
std::complex<double> closed_form_linv(const EmulatorConfig& cfg, double omega,
                                      double phi_amplitude);

/// Run-setup validation that needs the drive bandwidth: the floating
/// topology requires R1 < Rx2 + 1/(omega_max*C2) outside the Simplified tier.
void validate_for_run(const EmulatorConfig& cfg, double omega_max);

} // namespace memsim
