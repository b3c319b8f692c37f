#pragma once

// =============================================================================
// Gaussian process/mismatch parameter variation, deterministic batch
// simulation and robustness statistics.
//
// Semantics of the two deviation columns: the process draw is shared by all
// device blocks of one run; the mismatch draw is independent per block.
// Perturbed Vth adds directly; perturbed (tox, W, L) scale the lumped OTA
// gain via k ~ (1/tox)*(W/L) relative to the configured base geometry.
// =============================================================================

#include "memsim/emulator.hpp"
#include "memsim/fingerprints.hpp"
#include "memsim/source.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace memsim {

/// (process_sigma, mismatch_sigma) pair of one device parameter.
struct SigmaPair {
    double process = 0.0;
    double mismatch = 0.0;
};

struct DeviationSpec {
    SigmaPair tox{0.2e-9, 0.02e-9};   ///< oxide thickness [m]
    SigmaPair vth{0.04, 0.004};       ///< threshold voltage [V]
    SigmaPair length{2e-9, 0.2e-9};   ///< channel length [m]
    SigmaPair width{2e-9, 0.2e-9};    ///< channel width [m]

    // Base geometry the relative k scaling is anchored to.
    double base_tox = 4.1e-9;         ///< [m]
    double base_width = 12e-6;        ///< [m]
    double base_length = 375e-9;      ///< [m]

    int n_runs = 200;
    std::uint64_t seed = 0;
    double pinch_threshold = 0.05;

    void validate() const;
};

struct McRecord {
    int run_index = 0;
    double vth = 0.0;             ///< sampled effective Vth of the Gm4 block [V]
    double k = 0.0;               ///< sampled effective k of the Gm4 block [A/V^2]
    double pinch_residual = 0.0;
    double lobe_area_pos = 0.0;
    double lobe_area_neg = 0.0;
    bool ok = false;              ///< simulation + metrics succeeded
    std::string error;            ///< failure description when !ok
};

struct Histogram {
    double lo = 0.0, hi = 0.0;    ///< value range spanned by the bins
    std::vector<int> counts;      ///< 20 equal-width bins
};

struct McReport {
    std::vector<McRecord> records;        ///< one per run, ordered by run_index
    double vth_mean = 0.0, vth_sigma = 0.0;
    double k_mean = 0.0, k_sigma = 0.0;
    double pinched_fraction = 0.0;        ///< share of ok runs under the threshold
    Histogram vth_hist, k_hist;
};

/// One perturbed configuration, deterministic in (spec.seed, run_index).
/// Draws violating saturation validity are rejected and retried up to 100
/// times before a NumericError is raised.
EmulatorConfig sample_variation(const EmulatorConfig& base, const DeviationSpec& spec,
                                int run_index);

/// n_runs independent simulations of the perturbed emulator under src, with
/// loop metrics per run. Failed runs are recorded and excluded from the
/// aggregates. threads > 1 fans runs out to a worker pool; the report is
/// identical regardless of thread count.
McReport run_batch(const EmulatorConfig& base, const SourceSpec& src, const DeviationSpec& spec,
                   int threads = 1);

} // namespace memsim
