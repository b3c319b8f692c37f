#pragma once

// =============================================================================
// Series and parallel composition of two emulators. Parallel runs under a
// shared voltage drive (flux sharing explicit, currents add); series runs
// under a current drive (charge sharing explicit, fluxes add). The implicit
// current-driven parallel case is out of scope.
// =============================================================================

#include "memsim/emulator.hpp"
#include "memsim/source.hpp"
#include "memsim/trace.hpp"

#include <array>

namespace memsim {

enum class Wiring { ParallelSamePolarity, SeriesSamePolarity };

struct CompositeSpec {
    std::array<EmulatorConfig, 2> elements;
    Wiring wiring = Wiring::ParallelSamePolarity;
    SourceSpec drive;  ///< volts for parallel wiring, amps for series
};

/// Both elements integrate under the shared voltage source. The composite
/// trace carries the shared flux and the summed current, charge and inverse
/// meminductance.
Trace simulate_parallel(const CompositeSpec& spec, double t_end, double dt);

/// Current-driven series pair. Per element the flux follows explicitly from
/// phi_i = I / Linv_i(rho_i) (Simplified-tier law), so both elements must be
/// configured at the Simplified tier. The composite trace carries the summed
/// flux, the shared charge and the drive current; its vin column is the
/// composite terminal voltage d(phi)/dt. Throws NumericError with time and
/// state when an element's inverse meminductance reaches zero.
Trace simulate_series(const CompositeSpec& spec, double t_end, double dt);

} // namespace memsim
