#pragma once

#include <string>
#include <vector>

namespace memsim {

/// One tone of a (multi-)sinusoidal drive.
struct Tone {
    double amplitude = 0.0;     ///< [V] (or [A] when driving a series network)
    double frequency = 0.0;     ///< [Hz]
    double phase = 0.0;         ///< [rad]
};

/// Drive waveform. The base convention is v(t) = sum A*sin(w*t + phase);
/// with dc_flux_removal enabled every tone is advanced by pi/2 (cosine
/// drive), which keeps the accumulated flux zero-mean and the flux
/// integral bounded — periodic steady state instead of secular drift.
struct SourceSpec {
    enum class Kind { Sine, MultiTone, Samples };

    Kind kind = Kind::Sine;
    std::vector<Tone> tones = {Tone{0.14, 1e6, 0.0}};  ///< Sine uses tones[0]

    double sample_dt = 0.0;             ///< Samples kind: grid spacing [s]
    std::vector<double> samples;        ///< Samples kind: values on the grid

    bool dc_flux_removal = true;

    void validate() const;
};

/// Evaluate the source at time t. Samples are linearly interpolated;
/// out-of-range t throws NumericError.
double source_eval(const SourceSpec& spec, double t);

/// Analytic time derivative of the source (finite differences for Samples).
double source_eval_derivative(const SourceSpec& spec, double t);

/// Highest tone frequency (Samples: Nyquist of the sample grid).
double source_max_frequency(const SourceSpec& spec);

/// One-line human-readable description, stored in trace metadata.
std::string source_describe(const SourceSpec& spec);

/// Default integration step: 1 / (2000 * f_max).
double default_dt(const SourceSpec& spec);

} // namespace memsim
