#pragma once

// =============================================================================
// Quantitative meminductor fingerprints on steady-state windows: pinch
// residual at the flux zero crossings, signed lobe areas of the phi-I loop,
// the area-vs-frequency profile, and single-valuedness of the q(rho) locus.
// =============================================================================

#include "memsim/emulator.hpp"
#include "memsim/source.hpp"
#include "memsim/trace.hpp"

#include <utility>
#include <vector>

namespace memsim {

struct LoopMetrics {
    double pinch_residual = 0.0;   ///< max |I| at phi crossings / max |I|
    double lobe_area_pos = 0.0;    ///< signed area of the phi > 0 lobe [Wb*A]
    double lobe_area_neg = 0.0;    ///< signed area of the phi < 0 lobe [Wb*A]
    double area_normalized = 0.0;  ///< mean |lobe| / (phi_max * I_max)
    double qr_spread = 0.0;        ///< q(rho) multi-valuedness measure
};

/// Interpolated |I| at each phi zero crossing, maximum, normalized by the
/// window's max |I|. Requires >= 2 crossings; throws NumericError otherwise.
double pinch_residual(const Trace& w);

/// Signed shoelace integral of I dphi over the loop, split at the phi zero
/// crossings into the positive-phi and negative-phi lobes. The window must
/// cover exactly one source period.
std::pair<double, double> lobe_areas(const Trace& w);

/// Multi-valuedness of q over rho: rho is split into 100 equal bins and the
/// residual spread of q is taken per bin after removing the local linear
/// trend (so the slope of a perfectly single-valued locus does not register),
/// normalized by the global q range. Throws NumericError when the rho range
/// is degenerate (< 1e-18 Wb*s).
double q_rho_single_valuedness(const Trace& w);

/// All loop metrics of a steady window covering exactly one period.
LoopMetrics loop_metrics(const Trace& one_period_window);

enum class SweepHold {
    C1fConst,  ///< scale C1 so that C1*f stays at its configured product
    CFixed     ///< keep both capacitors fixed
};

struct AreaProfilePoint {
    double frequency = 0.0;
    double area_normalized = 0.0;
    double pinch_residual = 0.0;
};

struct AreaProfile {
    std::vector<AreaProfilePoint> points;
    bool monotone_decreasing = false;  ///< meaningful for SweepHold::CFixed
};

/// Run the emulator across the frequency list (strictly increasing, >= 3
/// entries) and collect normalized lobe areas. settle_periods full periods
/// are simulated before the measurement window.
AreaProfile area_frequency_profile(const EmulatorConfig& cfg, double src_amplitude,
                                   const std::vector<double>& freqs, SweepHold hold,
                                   int settle_periods = 12);

} // namespace memsim
