#include "memsim/source.hpp"
#include "memsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace memsim {

namespace {
constexpr double kPi = 3.141592653589793;
}

void SourceSpec::validate() const {
    if (kind == Kind::Samples) {
        if (!(sample_dt > 0.0)) throw ConfigError("SourceSpec: sample_dt must be > 0");
        if (samples.size() < 2) throw ConfigError("SourceSpec: need at least 2 samples");
        return;
    }
    if (tones.empty()) throw ConfigError("SourceSpec: no tones configured");
    if (kind == Kind::Sine && tones.size() != 1) {
        throw ConfigError("SourceSpec: Sine kind takes exactly one tone");
    }
    for (const auto& t : tones) {
        if (!(t.frequency > 0.0)) throw ConfigError("SourceSpec: tone frequency must be > 0");
        if (!(t.amplitude >= 0.0)) throw ConfigError("SourceSpec: tone amplitude must be >= 0");
    }
}

double source_eval(const SourceSpec& spec, double t) {
    if (spec.kind == SourceSpec::Kind::Samples) {
        const double pos = t / spec.sample_dt;
        if (pos < 0.0 || pos > static_cast<double>(spec.samples.size() - 1)) {
            throw NumericError("source_eval: t outside the sampled range");
        }
        const auto i = static_cast<std::size_t>(pos);
        if (i + 1 >= spec.samples.size()) return spec.samples.back();
        const double frac = pos - static_cast<double>(i);
        return spec.samples[i] + frac * (spec.samples[i + 1] - spec.samples[i]);
    }
    const double shift = spec.dc_flux_removal ? kPi / 2.0 : 0.0;
    double v = 0.0;
    for (const auto& tone : spec.tones) {
        v += tone.amplitude * std::sin(2.0 * kPi * tone.frequency * t + tone.phase + shift);
    }
    return v;
}

double source_eval_derivative(const SourceSpec& spec, double t) {
    if (spec.kind == SourceSpec::Kind::Samples) {
        const double h = spec.sample_dt;
        const double t_hi = static_cast<double>(spec.samples.size() - 1) * h;
        const double a = std::max(0.0, t - 0.5 * h);
        const double b = std::min(t_hi, t + 0.5 * h);
        return (source_eval(spec, b) - source_eval(spec, a)) / (b - a);
    }
    const double shift = spec.dc_flux_removal ? kPi / 2.0 : 0.0;
    double dv = 0.0;
    for (const auto& tone : spec.tones) {
        const double w = 2.0 * kPi * tone.frequency;
        dv += tone.amplitude * w * std::cos(w * t + tone.phase + shift);
    }
    return dv;
}

std::string source_describe(const SourceSpec& spec) {
    char buf[96];
    if (spec.kind == SourceSpec::Kind::Samples) {
        std::snprintf(buf, sizeof(buf), "samples n=%zu dt=%g", spec.samples.size(),
                      spec.sample_dt);
        return buf;
    }
    std::string desc = spec.kind == SourceSpec::Kind::Sine ? "sine" : "multi_tone";
    for (const auto& tone : spec.tones) {
        std::snprintf(buf, sizeof(buf), " A=%g f=%g phase=%g", tone.amplitude, tone.frequency,
                      tone.phase);
        desc += buf;
    }
    if (spec.dc_flux_removal) desc += " (dc flux removal)";
    return desc;
}

double source_max_frequency(const SourceSpec& spec) {
    if (spec.kind == SourceSpec::Kind::Samples) {
        return 0.5 / spec.sample_dt;
    }
    double f = 0.0;
    for (const auto& tone : spec.tones) f = std::max(f, tone.frequency);
    return f;
}

double default_dt(const SourceSpec& spec) {
    const double f = source_max_frequency(spec);
    if (!(f > 0.0)) throw ConfigError("default_dt: source has no positive frequency");
    return 1.0 / (2000.0 * f);
}

} // namespace memsim
