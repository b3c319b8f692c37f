#include "memsim/device_blocks.hpp"
#include "memsim/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace memsim {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

void OtaParams::validate() const {
    if (!(k > 0.0)) throw ConfigError("OtaParams: k must be > 0");
    if (!(Vdd > 0.0 && Vss < 0.0)) throw ConfigError("OtaParams: rails must satisfy Vdd > 0 > Vss");
    if (!(tau >= 0.0)) throw ConfigError("OtaParams: tau must be >= 0");
    if (!(omega_a > 0.0)) throw ConfigError("OtaParams: omega_a must be > 0");
    if (!(Ro > 0.0)) throw ConfigError("OtaParams: Ro must be > 0");
}

void CcciiParams::validate() const {
    if (!(Rx >= 0.0)) throw ConfigError("CcciiParams: Rx must be >= 0");
    if (!(beta0 > 0.0 && beta0 <= 1.1)) throw ConfigError("CcciiParams: beta0 must be in (0, 1.1]");
    if (!(alpha0 > 0.0 && alpha0 <= 1.1)) throw ConfigError("CcciiParams: alpha0 must be in (0, 1.1]");
    if (!(omega_beta > 0.0 && omega_alpha > 0.0)) throw ConfigError("CcciiParams: transfer poles must be > 0");
}

double ota_gm(const OtaParams& p) {
    const double overdrive = p.Vb - p.Vss - 2.0 * p.Vth;
    if (overdrive < 0.0) {
        throw std::domain_error("ota_gm: Vb - Vss - 2*Vth < 0 (transistors out of saturation)");
    }
    return p.k / kSqrt2 * overdrive;
}

double ota_current(double gm, double v_plus, double v_minus, int sign) {
    return (sign >= 0 ? 1.0 : -1.0) * gm * (v_plus - v_minus);
}

double cccii_rx(double Ib, const MosPair& pair) {
    if (!(Ib > 0.0)) {
        throw std::domain_error("cccii_rx: bias current must be > 0");
    }
    const double gm_sum = std::sqrt(2.0 * Ib) *
        (std::sqrt(pair.mu_cox_p * pair.wl_ratio_p) + std::sqrt(pair.mu_cox_n * pair.wl_ratio_n));
    return 1.0 / gm_sum;
}

std::complex<double> ota_gamma(const OtaParams& p, double omega, GammaRegime regime) {
    const std::complex<double> s(0.0, omega);
    std::complex<double> g = p.omega_a / (s + p.omega_a);
    if (regime == GammaRegime::High) {
        g *= std::exp(std::complex<double>(0.0, -omega * p.tau));
    }
    return g;
}

std::complex<double> ccii_transfer(double beta0, double omega_beta, double omega) {
    return beta0 / std::complex<double>(1.0, omega / omega_beta);
}

} // namespace memsim
