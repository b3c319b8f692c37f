#include "memsim/am.hpp"
#include "memsim/errors.hpp"
#include "memsim/integrate.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

namespace memsim {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kTwoPi = 6.283185307179586;

double omega0(const BiquadSpec& s) { return kTwoPi * s.f0; }

// State-space form used for all time-domain biquads:
//   x1' = x2
//   x2' = -w0^2*x1 - (w0/Q)*x2 + u
//   y_bp = (w0/Q)*x2,  y_lp = w0^2*x1
void biquad_rhs(const BiquadSpec& s, double u, const double x[2], double dx[2]) {
    const double w0 = omega0(s);
    dx[0] = x[1];
    dx[1] = -w0 * w0 * x[0] - w0 / s.Q * x[1] + u;
}

double biquad_output(const BiquadSpec& s, const double x[2]) {
    const double w0 = omega0(s);
    return s.kind == BiquadSpec::Kind::BandPass ? (w0 / s.Q) * x[1] : w0 * w0 * x[0];
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double da = a[k] - ma, db = b[k] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

// Single-bin DFT phase of x at frequency f (window should span an integer
// number of periods of f).
double tone_phase(const std::vector<double>& t, const std::vector<double>& x,
                  std::size_t begin, std::size_t count, double f) {
    double re = 0.0, im = 0.0;
    for (std::size_t k = begin; k < begin + count; ++k) {
        const double arg = kTwoPi * f * t[k];
        re += x[k] * std::cos(arg);
        im -= x[k] * std::sin(arg);
    }
    return std::atan2(im, re);
}

std::mutex g_fftw_mutex;  // FFTW's planner is not thread-safe

} // namespace

void BiquadSpec::validate() const {
    if (!(f0 > 0.0)) throw ConfigError("BiquadSpec: f0 must be > 0");
    if (!(Q > 0.0)) throw ConfigError("BiquadSpec: Q must be > 0");
}

void AmConfig::validate() const {
    if (!(message.frequency > 0.0 && carrier.frequency > 0.0)) {
        throw ConfigError("AmConfig: tone frequencies must be > 0");
    }
    if (!(message.amplitude >= 0.0 && carrier.amplitude >= 0.0 && local_carrier.amplitude > 0.0)) {
        throw ConfigError("AmConfig: amplitudes must be non-negative (local carrier > 0)");
    }
    if (!(carrier.frequency > 10.0 * message.frequency)) {
        throw ConfigError("AmConfig: carrier frequency must exceed 10x the message frequency");
    }
    bpf.validate();
    lpf.validate();
    if (bpf.kind != BiquadSpec::Kind::BandPass ||
        std::fabs(bpf.f0 - carrier.frequency) > 1e-9 * carrier.frequency) {
        throw ConfigError("AmConfig: band-pass filter must be centered on the carrier");
    }
    if (lpf.kind != BiquadSpec::Kind::LowPass || lpf.f0 < message.frequency * (1.0 - 1e-12)) {
        throw ConfigError("AmConfig: low-pass cutoff must be at or above the message frequency");
    }
    if (std::fabs(local_carrier.frequency - carrier.frequency) > 1e-9 * carrier.frequency) {
        throw ConfigError("AmConfig: local carrier must match the carrier frequency");
    }
    emulator.validate();
}

std::complex<double> biquad_response(const BiquadSpec& spec, double omega) {
    const double w0 = omega0(spec);
    const std::complex<double> s(0.0, omega);
    const std::complex<double> den = s * s + (w0 / spec.Q) * s + w0 * w0;
    const std::complex<double> num =
        spec.kind == BiquadSpec::Kind::BandPass ? (w0 / spec.Q) * s : std::complex<double>(w0 * w0);
    return num / den;
}

std::vector<double> biquad_filter(const BiquadSpec& spec, const std::vector<double>& input,
                                  double dt) {
    spec.validate();
    if (!(dt > 0.0)) throw ConfigError("biquad_filter: dt must be > 0");
    std::vector<double> out(input.size());
    if (input.empty()) return out;

    double x[2] = {0.0, 0.0};
    out[0] = biquad_output(spec, x);
    for (std::size_t k = 0; k + 1 < input.size(); ++k) {
        auto u_at = [&](double theta) { return input[k] + theta * (input[k + 1] - input[k]); };
        double xt[2], d1[2], d2[2], d3[2], d4[2];
        biquad_rhs(spec, u_at(0.0), x, d1);
        xt[0] = x[0] + 0.5 * dt * d1[0];
        xt[1] = x[1] + 0.5 * dt * d1[1];
        biquad_rhs(spec, u_at(0.5), xt, d2);
        xt[0] = x[0] + 0.5 * dt * d2[0];
        xt[1] = x[1] + 0.5 * dt * d2[1];
        biquad_rhs(spec, u_at(0.5), xt, d3);
        xt[0] = x[0] + dt * d3[0];
        xt[1] = x[1] + dt * d3[1];
        biquad_rhs(spec, u_at(1.0), xt, d4);
        x[0] += dt / 6.0 * (d1[0] + 2.0 * d2[0] + 2.0 * d3[0] + d4[0]);
        x[1] += dt / 6.0 * (d1[1] + 2.0 * d2[1] + 2.0 * d3[1] + d4[1]);
        out[k + 1] = biquad_output(spec, x);
    }
    return out;
}

Trace modulate(const AmConfig& cfg, double t_end, double dt) {
    cfg.validate();
    if (!(dt > 0.0) || !(t_end >= 100.0 * dt)) {
        throw ConfigError("modulate: need dt > 0 and t_end >= 100*dt");
    }

    SourceSpec src;
    src.kind = SourceSpec::Kind::MultiTone;
    src.tones = {cfg.message, cfg.carrier};
    src.dc_flux_removal = true;
    validate_for_run(cfg.emulator, kTwoPi * cfg.carrier.frequency);

    const EmulatorRealization real(cfg.emulator, dt);
    const std::size_t ne = real.state_size();
    const std::size_t n = ne + 2;  // emulator states + band-pass biquad

    std::vector<double> y(n, 0.0), yt(n), k1(n), k2(n), k3(n), k4(n);
    auto rhs = [&](double t, const std::vector<double>& s, std::vector<double>& ds) {
        const double vin = source_eval(src, t);
        real.rhs(vin, std::span<const double>(s.data(), ne), std::span<double>(ds.data(), ne));
        const double current = real.outputs(vin, std::span<const double>(s.data(), ne)).current;
        biquad_rhs(cfg.bpf, current, &s[ne], &ds[ne]);
    };

    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    Trace trace;
    trace.dt = dt;
    trace.source_desc = source_describe(src) + " -> band-pass";
    trace.reserve(steps + 1);

    auto record = [&](double t) {
        const double vin = source_eval(src, t);
        const auto out = real.outputs(vin, std::span<const double>(y.data(), ne));
        trace.push(t, vin, y[0], y[1], y[2], biquad_output(cfg.bpf, &y[ne]), out.linv);
    };

    record(0.0);
    for (std::size_t step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        rhs(t, y, k1);
        for (std::size_t j = 0; j < n; ++j) yt[j] = y[j] + 0.5 * dt * k1[j];
        rhs(t + 0.5 * dt, yt, k2);
        for (std::size_t j = 0; j < n; ++j) yt[j] = y[j] + 0.5 * dt * k2[j];
        rhs(t + 0.5 * dt, yt, k3);
        for (std::size_t j = 0; j < n; ++j) yt[j] = y[j] + dt * k3[j];
        rhs(t + dt, yt, k4);
        for (std::size_t j = 0; j < n; ++j) {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            if (!std::isfinite(y[j])) {
                throw NumericError("modulate: non-finite state at step " + std::to_string(step + 1));
            }
        }
        record(t + dt);
    }
    return trace;
}

Spectrum spectrum(const Trace& w, double fundamental_hz) {
    if (w.size() < 4 || !(w.dt > 0.0)) throw ConfigError("spectrum: window too short");
    const std::size_t n = w.size();
    const double duration = w.dt * static_cast<double>(n);

    Spectrum out;
    const double periods = duration * fundamental_hz;
    out.leakage_warning = std::fabs(periods - std::round(periods)) > 1e-6 * periods;

    std::vector<double> in(w.i.begin(), w.i.end());
    std::vector<fftw_complex> raw(n / 2 + 1);
    {
        std::lock_guard lock(g_fftw_mutex);
        fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), raw.data(),
                                              FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    out.bins.resize(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
        const double mag = std::hypot(raw[k][0], raw[k][1]) / static_cast<double>(n);
        const bool interior = k != 0 && !(n % 2 == 0 && k == n / 2);
        out.bins[k].frequency = static_cast<double>(k) / duration;
        out.bins[k].magnitude = interior ? 2.0 * mag : mag;
    }
    return out;
}

DemodResult demodulate(const Trace& s_am, const AmConfig& cfg) {
    // Deliberately lighter than AmConfig::validate(): receiver studies probe
    // low-pass cutoffs below the message frequency.
    if (!(cfg.message.frequency > 0.0 && cfg.carrier.frequency > 0.0)) {
        throw ConfigError("demodulate: tone frequencies must be > 0");
    }
    if (!(cfg.local_carrier.amplitude > 0.0)) {
        throw ConfigError("demodulate: local carrier amplitude must be > 0");
    }
    cfg.bpf.validate();
    cfg.lpf.validate();
    if (!(s_am.dt > 0.0)) throw ConfigError("demodulate: trace has no positive dt");
    const double fm = cfg.message.frequency;
    const double fc = cfg.carrier.frequency;
    const auto n_win = static_cast<std::size_t>(std::llround(4.0 / (fm * s_am.dt)));
    if (s_am.size() < n_win + 2) {
        throw NumericError("demodulate: trace shorter than 4 message periods");
    }
    const std::size_t begin = s_am.size() - n_win;

    // Recover the received carrier phase from the signal itself (the
    // emulator chain rides the carrier on the integrated flux, so its phase
    // is not the drive phase). local_carrier.phase measures misalignment on
    // top of the recovered phase.
    const double carrier_phase = tone_phase(s_am.t, s_am.i, begin, n_win, fc);

    // Product followed by the low-pass biquad on the same sample grid.
    const std::size_t n = s_am.size();
    std::vector<double> product(n);
    for (std::size_t k = 0; k < n; ++k) {
        product[k] = s_am.i[k] * cfg.local_carrier.amplitude *
                     std::cos(kTwoPi * fc * s_am.t[k] + carrier_phase + cfg.local_carrier.phase);
    }
    const std::vector<double> lp = biquad_filter(cfg.lpf, product, s_am.dt);

    DemodResult res;
    res.t.assign(s_am.t.begin() + static_cast<std::ptrdiff_t>(begin), s_am.t.end());
    res.message_estimate.assign(lp.begin() + static_cast<std::ptrdiff_t>(begin), lp.end());

    double mean = 0.0;
    for (double v : res.message_estimate) mean += v;
    mean /= static_cast<double>(n_win);
    for (double& v : res.message_estimate) v -= mean;

    double rms_out = 0.0, rms_in = 0.0;
    for (std::size_t k = 0; k < n_win; ++k) {
        rms_out += res.message_estimate[k] * res.message_estimate[k];
        rms_in += s_am.i[begin + k] * s_am.i[begin + k];
    }
    rms_out = std::sqrt(rms_out / static_cast<double>(n_win));
    rms_in = std::sqrt(rms_in / static_cast<double>(n_win));
    if (!(rms_out > 1e-12 * rms_in)) {
        throw NumericError("demodulate: degenerate output (RMS below 1e-12 of the input)");
    }

    // Deterministic phase of the receive chain at fm: LPF phase plus the
    // differential phase the band-pass imprints on the two sidebands. The
    // carrier recovery leaves a binary sign ambiguity, resolved towards the
    // better-aligned branch.
    const double wm = kTwoPi * fm;
    const double wc = kTwoPi * fc;
    const double chain_phase =
        std::arg(biquad_response(cfg.lpf, wm)) +
        0.5 * (std::arg(biquad_response(cfg.bpf, wc + wm)) -
               std::arg(biquad_response(cfg.bpf, wc - wm)));

    std::vector<double> ref(n_win);
    const double am = cfg.message.amplitude > 0.0 ? cfg.message.amplitude : 1.0;
    for (std::size_t k = 0; k < n_win; ++k) {
        ref[k] = am * std::cos(wm * res.t[k] + chain_phase);
    }
    const double r_plus = pearson(res.message_estimate, ref);
    if (r_plus < 0.0) {
        for (double& v : ref) v = -v;
    }
    res.correlation = std::fabs(r_plus);
    res.message_reference = std::move(ref);
    return res;
}

AmSidebandCoeffs sideband_coefficients(const AmConfig& cfg) {
    cfg.validate();
    const Coefficients c = derive_coefficients(cfg.emulator);
    const double wm = kTwoPi * cfg.message.frequency;
    const double wc = kTwoPi * cfg.carrier.frequency;
    const double phi_m = cfg.message.amplitude / wm;
    const double phi_c = cfg.carrier.amplitude / wc;
    // From-rest DC of the flux integral under cosine drive; it rides on the
    // baseline and belongs in the carrier term.
    const double rho0 = phi_m / wm + phi_c / wc;

    AmSidebandCoeffs out;
    out.beta7 = std::fabs((c.a + c.mode_sign * c.b * rho0) * phi_c);
    out.beta8 = 0.5 * c.b * phi_m * phi_c / wm;
    out.beta8p = 0.5 * c.b * phi_m * phi_c / wc;
    return out;
}

} // namespace memsim
