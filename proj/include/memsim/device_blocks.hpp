#pragma once

// =============================================================================
// Behavioral models of the active building blocks: OTA, CCII and CCCII.
// Static transconductance / X-port resistance laws plus the non-ideal
// frequency-dependent gains used by the closed-form analyzers.
// =============================================================================

#include <complex>

namespace memsim {

/// OTA device/bias parameters. The transconductance law is
///   Gm = (k/sqrt(2)) * (Vb - Vss - 2*Vth)
/// valid while the bias keeps the input pair in saturation.
/// omega_a / tau / Ro / Co / Ci describe the non-ideal single-pole roll-off,
/// excess-phase delay and output/input parasitics.
struct OtaParams {
    double k = 1e-3;        ///< device gain mu*Cox*W/L [A/V^2]
    double Vth = 0.45;      ///< threshold voltage [V]
    double Vss = -1.2;      ///< negative rail [V]
    double Vdd = 1.2;       ///< positive rail [V]
    double Vb = 0.0;        ///< bias voltage [V]
    double omega_a = 6.2831853071795862e8;  ///< first-corner frequency [rad/s]
    double tau = 1.25e-9;   ///< excess phase delay [s]
    double Ro = 1e6;        ///< output resistance [ohm]
    double Co = 100e-15;    ///< output capacitance [F]
    double Ci = 50e-15;     ///< input capacitance [F]

    /// Throws ConfigError when a structural invariant is violated.
    void validate() const;
};

/// Current-conveyor parameters (CCII and CCCII share the model; the CCCII
/// additionally derives Rx from its bias current, see rx_from_bias()).
struct CcciiParams {
    double Rx = 5.0;        ///< X-port series resistance [ohm]
    double Lx = 150e-6;     ///< X-port series inductance [H]
    double Ry = 1e9;        ///< Y-port resistance [ohm]
    double Cy = 10e-15;     ///< Y-port capacitance [F]
    double Rz = 1e6;        ///< Z-port resistance [ohm]
    double Cz = 10e-15;     ///< Z-port capacitance [F]
    double beta0 = 1.0;     ///< DC voltage-transfer gain
    double alpha0 = 1.0;    ///< DC current-transfer gain
    double omega_beta = 6.2831853071795862e8;   ///< voltage-transfer pole [rad/s]
    double omega_alpha = 6.2831853071795862e8;  ///< current-transfer pole [rad/s]

    void validate() const;
};

/// Transistor-pair constants entering the CCCII X-port resistance law.
/// mu_cox_* are the mu*Cox products [A/V^2], *_ratio the W/L aspect ratios.
/// The defaults are sized so Rx lands in the few-ohm range the conveyor
/// model assumes at the 20 uA operating point (Rx ~ 2.8 ohm).
struct MosPair {
    double mu_cox_n = 60.0;
    double wl_ratio_n = 24.0;
    double mu_cox_p = 15.0;
    double wl_ratio_p = 24.0;
};

/// Frequency regime selector for the non-ideal OTA gain.
enum class GammaRegime { Low, High };

/// Gm = (k/sqrt(2)) * (Vb - Vss - 2*Vth)  [S]
/// Throws std::domain_error when the overdrive is negative (pair out of
/// saturation).
double ota_gm(const OtaParams& p);

/// Output current of one OTA port: sign * gm * (v_plus - v_minus).
double ota_current(double gm, double v_plus, double v_minus, int sign = +1);

/// CCCII X-port resistance from the bias current:
///   Rx = 1 / ( sqrt(2*Ib) * ( sqrt(mu_cox_p*Wp/Lp) + sqrt(mu_cox_n*Wn/Ln) ) )
/// Throws std::domain_error for Ib <= 0.
double cccii_rx(double Ib, const MosPair& pair = MosPair{});

/// Non-ideal transconductance gain coefficient:
///   gamma = omega_a / (j*omega + omega_a)            (low/mid regime)
///   gamma = omega_a / (j*omega + omega_a) * e^{-j*omega*tau}   (high regime)
std::complex<double> ota_gamma(const OtaParams& p, double omega, GammaRegime regime);

/// Single-pole conveyor transfer: beta(j*omega) = beta0 / (1 + j*omega/omega_beta).
/// The identical form serves for the current transfer alpha.
std::complex<double> ccii_transfer(double beta0, double omega_beta, double omega);

} // namespace memsim
