#include <catch2/catch_amalgamated.hpp>

#include "memsim/am.hpp"
#include "memsim/errors.hpp"

#include <cmath>

using namespace memsim;
using Catch::Approx;

namespace {

constexpr double kTwoPi = 6.283185307179586;

// Table-7-style pipeline: 120 mV / 50 kHz message on a 370 mV / 1 MHz
// carrier, C1 = 32 pF, band-pass at the carrier (Q = 5), low-pass at 50 kHz.
AmConfig table7() {
    AmConfig cfg;
    cfg.message = Tone{0.12, 50e3, 0.0};
    cfg.carrier = Tone{0.37, 1e6, 0.0};
    cfg.local_carrier = Tone{0.45, 1e6, 0.0};
    cfg.bpf = BiquadSpec{BiquadSpec::Kind::BandPass, 1e6, 5.0};
    cfg.lpf = BiquadSpec{BiquadSpec::Kind::LowPass, 50e3, 0.7071067811865476};
    cfg.emulator.C1 = 32e-12;
    cfg.emulator.ota4.Vb = 0.45;
    set_rx_from_bias(cfg.emulator.cccii2, 20e-6);
    return cfg;
}

double mag_at(const Spectrum& spec, double f) {
    const double df = spec.bins[1].frequency;
    return spec.bins.at(static_cast<std::size_t>(std::llround(f / df))).magnitude;
}

} // namespace

TEST_CASE("biquad response anchors", "[am-pipeline]") {
    const BiquadSpec bp{BiquadSpec::Kind::BandPass, 1e6, 5.0};
    const BiquadSpec lp{BiquadSpec::Kind::LowPass, 50e3, 0.7071067811865476};
    const double w0 = kTwoPi * 1e6;

    CHECK(std::abs(biquad_response(bp, w0) - std::complex<double>(1.0, 0.0)) < 1e-12);
    CHECK(biquad_response(lp, 0.0) == std::complex<double>(1.0, 0.0));
    CHECK(std::abs(biquad_response(bp, w0 / 10.0)) ==
          Approx(0.020197899022825542).epsilon(1e-12));
}

TEST_CASE("biquad impulse energy", "[am-pipeline]") {
    const double dt = 1e-7;
    const std::size_t n = 40000;  // 4 ms >> 1/w0 settle
    std::vector<double> impulse(n, 0.0);
    impulse[1] = 1.0 / dt;  // unit-area impulse

    const BiquadSpec lp{BiquadSpec::Kind::LowPass, 5e3, 0.7071067811865476};
    const BiquadSpec bp{BiquadSpec::Kind::BandPass, 5e3, 5.0};

    auto integral = [dt](const std::vector<double>& y) {
        double s = 0.0;
        for (double v : y) s += v * dt;
        return s;
    };
    CHECK(integral(biquad_filter(lp, impulse, dt)) == Approx(1.0).epsilon(0.01));
    CHECK(std::fabs(integral(biquad_filter(bp, impulse, dt))) < 0.01);
}

TEST_CASE("spectrum of pure and mixed tones", "[am-pipeline]") {
    const double f = 1e6;
    const double dt = 1.0 / (2000.0 * f);
    Trace t;
    t.dt = dt;
    const std::size_t n = 8000;  // exactly 4 periods
    for (std::size_t k = 0; k < n; ++k) {
        const double time = dt * static_cast<double>(k);
        t.push(time, 0, 0, 0, 0, std::sin(kTwoPi * f * time), 0);
    }

    SECTION("bin-aligned sine occupies a single bin") {
        const Spectrum s = spectrum(t, f);
        CHECK_FALSE(s.leakage_warning);
        const double peak = mag_at(s, f);
        CHECK(peak == Approx(1.0).epsilon(1e-9));
        const double df = s.bins[1].frequency;
        CHECK(mag_at(s, f - df) < 1e-10 * peak);
        CHECK(mag_at(s, f + df) < 1e-10 * peak);
    }

    SECTION("two tones give two bins") {
        Trace two = t;
        for (std::size_t k = 0; k < n; ++k) {
            two.i[k] += 0.5 * std::sin(kTwoPi * 2.0 * f * two.t[k]);
        }
        const Spectrum s = spectrum(two, f);
        CHECK(mag_at(s, f) == Approx(1.0).epsilon(1e-9));
        CHECK(mag_at(s, 2.0 * f) == Approx(0.5).epsilon(1e-9));
    }

    SECTION("non-integer window flags leakage") {
        const Trace chopped = t.slice(0, 7000);
        CHECK(spectrum(chopped, f).leakage_warning);
    }
}

TEST_CASE("modulation places power at the carrier and both sidebands", "[am-pipeline]") {
    const AmConfig cfg = table7();
    const double fm = cfg.message.frequency;
    const double dt = 1.0 / (2000.0 * cfg.carrier.frequency);
    const Trace s_am = modulate(cfg, 6.0 / fm, dt);

    const auto n_win = static_cast<std::size_t>(std::llround(4.0 / (fm * dt)));
    const Spectrum spec = spectrum(s_am.slice(s_am.size() - n_win, n_win), fm);

    const double fc = cfg.carrier.frequency;
    const double carrier = mag_at(spec, fc);
    const double upper = mag_at(spec, fc + fm);
    const double lower = mag_at(spec, fc - fm);
    REQUIRE(carrier > 0.0);
    CHECK(upper > 0.1 * carrier);
    CHECK(lower > 0.1 * carrier);

    SECTION("sideband symmetry and the beta8p asymmetry bound") {
        const AmSidebandCoeffs coeffs = sideband_coefficients(cfg);
        const double asym = std::fabs(upper - lower) / (upper + lower);
        CHECK(asym <= 0.10);
        CHECK(asym <= 2.0 * coeffs.beta8p / coeffs.beta8);
    }

    SECTION("measured sideband-to-carrier ratio tracks beta8/beta7") {
        const AmSidebandCoeffs coeffs = sideband_coefficients(cfg);
        const double measured = 0.5 * (upper + lower) / carrier;
        const double predicted = coeffs.beta8 / coeffs.beta7;
        CHECK(std::fabs(measured / predicted - 1.0) < 0.25);
    }

    SECTION("unmodulated carrier has no sidebands") {
        AmConfig quiet = cfg;
        quiet.message.amplitude = 0.0;
        const Trace pure = modulate(quiet, 6.0 / fm, dt);
        const Spectrum ps = spectrum(pure.slice(pure.size() - n_win, n_win), fm);
        CHECK(mag_at(ps, fc + fm) < 1e-6 * mag_at(ps, fc));
        CHECK(mag_at(ps, fc - fm) < 1e-6 * mag_at(ps, fc));
    }
}

TEST_CASE("envelope tracks the message", "[am-pipeline]") {
    const AmConfig cfg = table7();
    const double fm = cfg.message.frequency;
    const double fc = cfg.carrier.frequency;
    const double dt = 1.0 / (2000.0 * fc);
    const Trace s_am = modulate(cfg, 6.0 / fm, dt);

    // Per-carrier-period peak magnitude over the final two message periods.
    const auto per_carrier = static_cast<std::size_t>(std::llround(1.0 / (fc * dt)));
    const auto n_win = static_cast<std::size_t>(std::llround(2.0 / (fm * dt)));
    const std::size_t begin = s_am.size() - n_win;
    std::vector<double> env, msg;
    for (std::size_t k = begin; k + per_carrier <= s_am.size(); k += per_carrier) {
        double peak = 0.0;
        for (std::size_t j = k; j < k + per_carrier; ++j) peak = std::max(peak, std::fabs(s_am.i[j]));
        env.push_back(peak);
        msg.push_back(std::cos(kTwoPi * fm * s_am.t[k + per_carrier / 2]));
    }
    REQUIRE(env.size() >= 30);

    // Envelope is linear in the message; sign of the correlation depends on
    // the modulation polarity, so judge by magnitude at the best alignment.
    double best = 0.0;
    const std::size_t period_points = env.size() / 2;
    for (std::size_t lag = 0; lag < period_points; ++lag) {
        double num = 0.0, da = 0.0, db = 0.0, ma = 0.0, mb = 0.0;
        const std::size_t m = env.size() - lag;
        for (std::size_t k = 0; k < m; ++k) {
            ma += env[k + lag];
            mb += msg[k];
        }
        ma /= static_cast<double>(m);
        mb /= static_cast<double>(m);
        for (std::size_t k = 0; k < m; ++k) {
            num += (env[k + lag] - ma) * (msg[k] - mb);
            da += (env[k + lag] - ma) * (env[k + lag] - ma);
            db += (msg[k] - mb) * (msg[k] - mb);
        }
        best = std::max(best, std::fabs(num / std::sqrt(da * db)));
    }
    CHECK(best > 0.9);
}

TEST_CASE("coherent demodulation recovers the message", "[am-pipeline]") {
    const AmConfig cfg = table7();
    const double fm = cfg.message.frequency;
    const double dt = 1.0 / (2000.0 * cfg.carrier.frequency);
    const Trace s_am = modulate(cfg, 6.0 / fm, dt);

    SECTION("Table-7 pipeline end to end") {
        const DemodResult res = demodulate(s_am, cfg);
        CHECK(res.correlation >= 0.95);
    }

    SECTION("quadrature local carrier kills the message") {
        AmConfig quad = cfg;
        quad.local_carrier.phase = kTwoPi / 4.0;
        const DemodResult res = demodulate(s_am, quad);
        CHECK(res.correlation < 0.25);
    }

    SECTION("correlation degrades as the LPF cutoff drops below fm") {
        std::vector<double> rs;
        for (double f0 : {50e3, 20e3, 8e3}) {
            AmConfig probe = cfg;
            probe.lpf.f0 = f0;
            rs.push_back(demodulate(s_am, probe).correlation);
        }
        CHECK(rs[0] > rs[1]);
        CHECK(rs[1] > rs[2]);
    }
}

TEST_CASE("demodulating a textbook AM wave", "[am-pipeline]") {
    AmConfig cfg = table7();
    cfg.bpf.Q = 1e-3;  // wide-open front end: the wave never saw a band-pass
    const double fm = cfg.message.frequency;
    const double fc = cfg.carrier.frequency;
    const double dt = 1.0 / (2000.0 * fc);

    Trace wave;
    wave.dt = dt;
    const auto n = static_cast<std::size_t>(std::llround(6.0 / (fm * dt)));
    for (std::size_t k = 0; k < n; ++k) {
        const double time = dt * static_cast<double>(k);
        const double s = (1.0 + 0.5 * std::cos(kTwoPi * fm * time)) * std::cos(kTwoPi * fc * time);
        wave.push(time, 0, 0, 0, 0, s, 0);
    }

    const DemodResult res = demodulate(wave, cfg);
    CHECK(res.correlation > 0.999);

    SECTION("degenerate input is rejected") {
        Trace flat = wave;
        for (double& v : flat.i) v = 0.0;
        CHECK_THROWS_AS(demodulate(flat, cfg), NumericError);
    }
}

TEST_CASE("sideband coefficient diagnostics", "[am-pipeline]") {
    const AmConfig cfg = table7();
    const AmSidebandCoeffs c = sideband_coefficients(cfg);

    // Frozen from the product-law decomposition at the Table-7 settings.
    CHECK(c.beta7 == Approx(375.7911968045235).epsilon(1e-12));
    CHECK(c.beta8 == Approx(186.45418344193462).epsilon(1e-12));
    CHECK(c.beta8p == Approx(9.322709172096731).epsilon(1e-12));
    CHECK(c.beta8p / c.beta8 ==
          Approx(cfg.message.frequency / cfg.carrier.frequency).epsilon(1e-12));

    SECTION("no message, no sidebands") {
        AmConfig quiet = cfg;
        quiet.message.amplitude = 0.0;
        const AmSidebandCoeffs q = sideband_coefficients(quiet);
        CHECK(q.beta8 == 0.0);
        CHECK(q.beta8p == 0.0);
        CHECK(q.beta7 > 0.0);
    }
}

TEST_CASE("am config invariants", "[am-pipeline]") {
    AmConfig cfg = table7();
    cfg.carrier.frequency = 400e3;  // violates fc > 10*fm with fm = 50 kHz
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = table7();
    cfg.bpf.f0 = 1.2e6;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = table7();
    cfg.lpf.f0 = 10e3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
