#include <catch2/catch_amalgamated.hpp>

#include "memsim/errors.hpp"
#include "memsim/fingerprints.hpp"
#include "memsim/integrate.hpp"

#include <cmath>

using namespace memsim;
using Catch::Approx;

namespace {

EmulatorConfig paper_grounded(Fidelity fidelity = Fidelity::Simplified) {
    EmulatorConfig cfg;
    cfg.fidelity = fidelity;
    cfg.ota4.Vb = 0.45;
    set_rx_from_bias(cfg.cccii2, 20e-6);
    return cfg;
}

SourceSpec sine(double amplitude, double f) {
    SourceSpec src;
    src.tones = {Tone{amplitude, f, 0.0}};
    return src;
}

Trace steady_run(const EmulatorConfig& cfg, const SourceSpec& src, double f, int n_periods) {
    const double dt = default_dt(src);
    const Trace t = integrate(cfg, src, (n_periods + 6) / f, dt);
    return steady_window(t, f, n_periods);
}

// Independent charge-law oracle: q(t) = a*rho + mode_sign*(b/2)*rho^2 for a
// run from rest, by symbolic integration of dq = (a + s*b*rho) drho.
double charge_law_residual(const Trace& t, const Coefficients& c) {
    double emax = 0.0, qmax = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double law = c.a * t.rho[k] + c.mode_sign * 0.5 * c.b * t.rho[k] * t.rho[k];
        emax = std::max(emax, std::fabs(t.q[k] - law));
        qmax = std::max(qmax, std::fabs(t.q[k]));
    }
    return qmax > 0.0 ? emax / qmax : 0.0;
}

} // namespace

TEST_CASE("Simplified charge law holds to integrator tolerance", "[fingerprints]") {
    const EmulatorConfig cfg = paper_grounded();
    const Coefficients c = derive_coefficients(cfg);
    const double f = 1e6;
    const SourceSpec src = sine(0.14, f);
    const Trace t = integrate(cfg, src, 20.0 / f, default_dt(src));
    CHECK(charge_law_residual(t, c) < 1e-6);

    SECTION("path independence under a non-periodic multi-tone drive") {
        SourceSpec multi;
        multi.kind = SourceSpec::Kind::MultiTone;
        multi.tones = {Tone{0.10, 1e6, 0.0}, Tone{0.05, 1.31e6, 0.4}, Tone{0.03, 2.71e6, 1.1}};
        const Trace tr = integrate(cfg, multi, 2e-5, default_dt(multi));
        CHECK(charge_law_residual(tr, c) < 1e-6);
    }
}

TEST_CASE("pinch residual", "[fingerprints]") {
    const double f = 1e6;
    const SourceSpec src = sine(0.14, f);

    SECTION("Simplified tier pinches exactly") {
        const Trace w = steady_run(paper_grounded(), src, f, 4);
        CHECK(pinch_residual(w) < 1e-9);
    }

    SECTION("FullIdeal at the paper operating point stays under 5%") {
        const Trace w = steady_run(paper_grounded(Fidelity::FullIdeal), src, f, 4);
        CHECK(pinch_residual(w) < 0.05);
    }

    SECTION("resistor control case still returns a value in [0, 1]") {
        Trace t;
        t.dt = 1e-9;
        const double omega = 2.0 * 3.141592653589793 * f;
        for (int k = 0; k <= 4000; ++k) {
            const double time = 1e-9 * k;
            const double vin = 0.14 * std::cos(omega * time);
            const double phi = 0.14 / omega * std::sin(omega * time);
            t.push(time, vin, phi, 0.0, 0.0, 1e-3 * vin, 0.0);
        }
        const double r = pinch_residual(t);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        CHECK(r > 0.5);  // open curve: current is extremal at the flux crossings
    }

    SECTION("no crossings raises") {
        Trace t;
        t.dt = 1e-9;
        for (int k = 0; k < 100; ++k) t.push(1e-9 * k, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0);
        CHECK_THROWS_AS(pinch_residual(t), NumericError);
    }
}

TEST_CASE("lobe areas match the analytic oracle", "[fingerprints]") {
    const EmulatorConfig cfg = paper_grounded();
    const Coefficients c = derive_coefficients(cfg);
    const double f = 1e6;
    const double omega = 2.0 * 3.141592653589793 * f;
    const double amp = 0.14;
    const Trace w = steady_run(cfg, sine(amp, f), f, 1);

    // For phi = Phi*sin(wt) each lobe carries (2/3)*b*Phi^3/w; the positive
    // lobe is traversed against the incremental sign.
    const double phi_peak = amp / omega;
    const double expect = 2.0 / 3.0 * c.b * phi_peak * phi_peak * phi_peak / omega;

    const auto [pos, neg] = lobe_areas(w);
    CHECK(pos == Approx(-expect).epsilon(0.005));
    CHECK(neg == Approx(expect).epsilon(0.005));
    CHECK(std::fabs(pos + neg) < 0.005 * std::fabs(pos));

    SECTION("mode mirror swaps the lobe sign pattern") {
        EmulatorConfig dec = cfg;
        dec.mode = Mode::Decremental;
        const auto [pos_d, neg_d] = lobe_areas(steady_run(dec, sine(amp, f), f, 1));
        CHECK(pos_d == Approx(-pos).epsilon(0.005));
        CHECK(neg_d == Approx(-neg).epsilon(0.005));
    }

    SECTION("raw area scales as 1/omega^4 at fixed capacitance") {
        const auto [pos2, neg2] = lobe_areas(steady_run(cfg, sine(amp, 2.0 * f), 2.0 * f, 1));
        CHECK(std::fabs(pos2) == Approx(std::fabs(pos) / 16.0).epsilon(0.01));
        (void)neg2;
    }

    SECTION("zero Gm4 collapses the loop to a line") {
        EmulatorConfig linear = cfg;
        linear.ota4.Vb = linear.ota4.Vss + 2.0 * linear.ota4.Vth;  // Gm4 = 0
        const Trace wl = steady_run(linear, sine(amp, f), f, 1);
        const auto [pl, nl] = lobe_areas(wl);
        double phi_max = 0.0, i_max = 0.0;
        for (std::size_t k = 0; k < wl.size(); ++k) {
            phi_max = std::max(phi_max, std::fabs(wl.phi[k]));
            i_max = std::max(i_max, std::fabs(wl.i[k]));
        }
        CHECK(std::fabs(pl) < 1e-6 * phi_max * i_max);
        CHECK(std::fabs(nl) < 1e-6 * phi_max * i_max);
    }
}

TEST_CASE("q-rho locus is single-valued", "[fingerprints]") {
    const EmulatorConfig cfg = paper_grounded();
    const double f = 1e6;

    SECTION("Simplified tier") {
        const Trace w = steady_run(cfg, sine(0.14, f), f, 2);
        CHECK(q_rho_single_valuedness(w) < 1e-3);
    }

    SECTION("constant-Linv run is exactly linear") {
        EmulatorConfig linear = cfg;
        linear.ota4.Vb = linear.ota4.Vss + 2.0 * linear.ota4.Vth;
        const Trace w = steady_run(linear, sine(0.14, f), f, 2);
        CHECK(q_rho_single_valuedness(w) < 1e-6);
    }

    SECTION("degenerate rho range raises") {
        Trace t;
        t.dt = 1e-9;
        for (int k = 0; k < 100; ++k) t.push(1e-9 * k, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        CHECK_THROWS_AS(q_rho_single_valuedness(t), NumericError);
    }
}

TEST_CASE("floating topology pinches at its published operating point", "[fingerprints]") {
    // 200 mV drive, Vb4 = 0.5 V, Ib = 7 uA, R1 = 5 ohm, C2 = 150 pF.
    EmulatorConfig cfg;
    cfg.topology = Topology::Floating;
    cfg.R1 = 5.0;
    cfg.ota4.Vb = 0.5;
    set_rx_from_bias(cfg.cccii2, 7e-6);
    const double f = 1e6;
    const SourceSpec src = sine(0.2, f);

    SECTION("Simplified") {
        const Trace w = steady_run(cfg, src, f, 4);
        CHECK(pinch_residual(w) < 1e-9);
        CHECK(q_rho_single_valuedness(w) < 1e-3);
    }

    SECTION("FullIdeal") {
        EmulatorConfig full = cfg;
        full.fidelity = Fidelity::FullIdeal;
        const Trace w = steady_run(full, src, f, 4);
        CHECK(pinch_residual(w) < 0.05);
    }

    SECTION("charge law holds for the floating realization") {
        const Coefficients c = derive_coefficients(cfg);
        const Trace t = integrate(cfg, src, 20.0 / f, default_dt(src));
        CHECK(charge_law_residual(t, c) < 1e-6);
    }
}

TEST_CASE("area-frequency profile", "[fingerprints]") {
    const EmulatorConfig cfg = paper_grounded();

    SECTION("fixed capacitance: normalized area strictly decreases") {
        const AreaProfile p =
            area_frequency_profile(cfg, 0.14, {0.5e6, 1e6, 2e6}, SweepHold::CFixed);
        REQUIRE(p.points.size() == 3);
        CHECK(p.monotone_decreasing);
        CHECK(p.points[0].area_normalized > p.points[1].area_normalized);
        CHECK(p.points[1].area_normalized > p.points[2].area_normalized);
    }

    SECTION("constant C1*f preserves the pinch across the ladder") {
        const AreaProfile p = area_frequency_profile(
            cfg, 0.14, {0.5e6, 1e6, 5e6, 10e6}, SweepHold::C1fConst);
        for (const auto& point : p.points) {
            CHECK(point.pinch_residual < 0.05);
        }
    }

    SECTION("input validation") {
        CHECK_THROWS_AS(area_frequency_profile(cfg, 0.14, {1e6, 2e6}, SweepHold::CFixed),
                        ConfigError);
        CHECK_THROWS_AS(area_frequency_profile(cfg, 0.14, {2e6, 1e6, 3e6}, SweepHold::CFixed),
                        ConfigError);
    }
}
