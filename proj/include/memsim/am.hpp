#pragma once

// =============================================================================
// Amplitude modulation with the grounded emulator: message + carrier drive,
// band-pass extraction of the modulated current, rectangular-window spectrum
// and a coherent product demodulator.
// =============================================================================

#include "memsim/emulator.hpp"
#include "memsim/source.hpp"
#include "memsim/trace.hpp"

#include <complex>
#include <vector>

namespace memsim {

struct BiquadSpec {
    enum class Kind { BandPass, LowPass };
    Kind kind = Kind::BandPass;
    double f0 = 1e6;   ///< center (band-pass) or cutoff (low-pass) [Hz]
    double Q = 5.0;

    void validate() const;
};

struct AmConfig {
    Tone message{0.12, 50e3, 0.0};        ///< Am, fm
    Tone carrier{0.37, 1e6, 0.0};         ///< Ac, fc
    Tone local_carrier{0.45, 1e6, 0.0};   ///< demodulator oscillator
    BiquadSpec bpf{BiquadSpec::Kind::BandPass, 1e6, 5.0};
    BiquadSpec lpf{BiquadSpec::Kind::LowPass, 50e3, 0.7071067811865476};
    EmulatorConfig emulator;              ///< grounded meminductor

    void validate() const;
};

/// Second-order transfer function at s = j*omega:
///   band-pass  (w0/Q)s / (s^2 + (w0/Q)s + w0^2)
///   low-pass   w0^2    / (s^2 + (w0/Q)s + w0^2)
std::complex<double> biquad_response(const BiquadSpec& spec, double omega);

/// Fixed-step time-domain run of the biquad over a sampled input (linear
/// interpolation between samples), starting from rest.
std::vector<double> biquad_filter(const BiquadSpec& spec, const std::vector<double>& input,
                                  double dt);

/// Drive the emulator with message + carrier and band-pass filter its output
/// current inside the same fixed-step loop. The returned trace carries the
/// filtered AM signal in the `i` column (phi/rho/q/linv are the emulator's).
Trace modulate(const AmConfig& cfg, double t_end, double dt);

struct SpectrumBin {
    double frequency = 0.0;  ///< [Hz]
    double magnitude = 0.0;  ///< single-sided amplitude of the i column
};

struct Spectrum {
    std::vector<SpectrumBin> bins;   ///< spacing = 1/window_duration
    bool leakage_warning = false;    ///< window not an integer period count
};

/// Rectangular-window discrete Fourier magnitude spectrum of the trace's
/// current column. fundamental_hz is used only to flag non-integer windows.
Spectrum spectrum(const Trace& w, double fundamental_hz);

struct DemodResult {
    std::vector<double> t;                ///< final 4 message periods
    std::vector<double> message_estimate; ///< DC-removed LPF output
    std::vector<double> message_reference;
    double correlation = 0.0;             ///< Pearson r against the reference
};

/// Coherent product demodulation: multiply by the local carrier, low-pass
/// filter, remove DC, and correlate with the message over the final 4
/// message periods. The reference is advanced by the known deterministic
/// phase of the filter chain at fm (LPF phase plus the differential BPF
/// sideband phase), so the score measures waveform fidelity, not group
/// delay. Throws NumericError when the demodulated output is degenerate.
DemodResult demodulate(const Trace& s_am, const AmConfig& cfg);

/// Coefficients of the modulated current decomposition
///   I = b7*cos(wc t) + b8*[cos((wc+wm)t) + cos((wc-wm)t)] + b8p*cos((wc+wm)t)
/// evaluated from the product law of the simplified emulator with the
/// from-rest flux-integral offset. Diagnostic: the measured sideband/carrier
/// ratio is cross-checked against beta8/beta7, the sideband asymmetry
/// against beta8p/beta8.
struct AmSidebandCoeffs {
    double beta7 = 0.0;   ///< carrier amplitude [A]
    double beta8 = 0.0;   ///< symmetric sideband amplitude [A]
    double beta8p = 0.0;  ///< extra upper-sideband amplitude [A]
};

AmSidebandCoeffs sideband_coefficients(const AmConfig& cfg);

} // namespace memsim
