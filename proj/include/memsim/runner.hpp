#pragma once

#include "memsim/config.hpp"
#include "memsim/trace.hpp"

#include <filesystem>
#include <string>

namespace memsim {

/// Resolved sim settings for an experiment (defaults applied).
struct ResolvedSim {
    double t_end = 0.0;
    double dt = 0.0;
    int steady_periods = 4;
};

ResolvedSim resolve_sim(const ExperimentConfig& cfg);

/// Execute the experiment and emit trace.csv, summary.json and the
/// per-experiment extras into out_dir. Deterministic: identical configs give
/// byte-identical outputs. threads > 1 parallelizes Monte Carlo batches.
void run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                    int threads = 1);

/// trace.csv writer/reader (17 significant digits, LF line endings).
void write_trace_csv(const Trace& trace, const std::filesystem::path& file);
Trace read_trace_csv(const std::filesystem::path& file);

} // namespace memsim
