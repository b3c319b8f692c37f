#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace memsim {

/// Uniformly sampled simulation record. All analyzers consume this type.
/// Columns are kept as parallel arrays of equal length.
struct Trace {
    double dt = 0.0;

    std::vector<double> t;      ///< time [s]
    std::vector<double> vin;    ///< drive [V] (or [A] for current-driven runs)
    std::vector<double> phi;    ///< flux, integral of vin [Wb]
    std::vector<double> rho;    ///< integral of flux [Wb*s]
    std::vector<double> q;      ///< charge, integral of current [C]
    std::vector<double> i;      ///< terminal current [A]
    std::vector<double> linv;   ///< inverse meminductance diagnostic [1/H]

    std::uint64_t config_hash = 0;
    std::string source_desc;

    std::size_t size() const { return t.size(); }
    void reserve(std::size_t n);
    void push(double t_, double vin_, double phi_, double rho_, double q_, double i_, double linv_);

    /// Slice [begin, begin+count) of all columns, preserving metadata.
    Trace slice(std::size_t begin, std::size_t count) const;
};

/// Extract the final n_periods of frequency f, start-aligned to an upward
/// zero crossing of phi. The trace must span at least n_periods + 2 periods;
/// throws NumericError otherwise.
Trace steady_window(const Trace& trace, double f, int n_periods);

} // namespace memsim
