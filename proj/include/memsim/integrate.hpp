#pragma once

#include "memsim/emulator.hpp"
#include "memsim/source.hpp"
#include "memsim/trace.hpp"

namespace memsim {

/// Optional per-step capture of the internal emulator nodes, used by the
/// frequency-response probes. Aligned sample-for-sample with the Trace.
struct AuxTrace {
    std::vector<double> vinb;
    std::vector<double> vb3;
};

/// Classical fixed-step 4th-order integration of the emulator under the
/// given source. Deterministic: identical inputs give bit-identical traces.
/// Requires dt > 0 and t_end >= 100*dt; throws NumericError naming the first
/// step at which any state leaves finite range.
Trace integrate(const EmulatorConfig& cfg, const SourceSpec& src, double t_end, double dt,
                AuxTrace* aux = nullptr);

} // namespace memsim
