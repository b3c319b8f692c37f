#pragma once

// =============================================================================
// Experiment configuration: one JSON document holding the emulator, the
// source, the sim settings and exactly one experiment block. All physical
// quantities are SI base units; unknown keys are rejected with their path.
// =============================================================================

#include "memsim/am.hpp"
#include "memsim/emulator.hpp"
#include "memsim/fingerprints.hpp"
#include "memsim/montecarlo.hpp"
#include "memsim/network.hpp"
#include "memsim/source.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace memsim {

struct SimSettings {
    double t_end = 0.0;      ///< 0 = derive from the source and steady_periods
    double dt = 0.0;         ///< 0 = default_dt(source)
    int steady_periods = 4;
};

enum class ExperimentKind { Run, Sweep, Mc, Am, Compose };

struct SweepExperiment {
    std::vector<double> frequencies;
    SweepHold hold = SweepHold::CFixed;
};

struct ComposeExperiment {
    Wiring wiring = Wiring::ParallelSamePolarity;
    EmulatorConfig element2;
};

struct ExperimentConfig {
    EmulatorConfig emulator;
    SourceSpec source;
    SimSettings sim;

    ExperimentKind kind = ExperimentKind::Run;
    SweepExperiment sweep;
    DeviationSpec mc;
    AmConfig am;              ///< am.emulator mirrors the top-level emulator
    ComposeExperiment compose;

    std::uint64_t config_hash = 0;        ///< FNV-1a of the canonical document
    std::vector<std::string> warnings;    ///< accepted-but-ignored inputs
};

/// Parse and schema-check a UTF-8 JSON document. Violations raise ConfigError
/// carrying the JSON path and the expected range.
ExperimentConfig parse_config(const std::string& text);

/// FNV-1a 64-bit, used for config hashing and trace metadata.
std::uint64_t fnv1a64(const std::string& bytes);

const char* experiment_kind_name(ExperimentKind kind);

} // namespace memsim
