#include "memsim/fingerprints.hpp"
#include "memsim/errors.hpp"
#include "memsim/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace memsim {

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

// Zero crossings of phi by sign change + linear interpolation; an exact
// zero sample counts as a crossing at that sample.
struct Crossing {
    std::size_t index;  // segment [index, index+1]
    double frac;        // position inside the segment, in [0, 1]
};

std::vector<Crossing> phi_crossings(const Trace& w) {
    std::vector<Crossing> out;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
        const double p0 = w.phi[k], p1 = w.phi[k + 1];
        if (p0 == 0.0) {
            out.push_back({k, 0.0});
        } else if ((p0 < 0.0 && p1 > 0.0) || (p0 > 0.0 && p1 < 0.0)) {
            out.push_back({k, p0 / (p0 - p1)});
        }
    }
    return out;
}

} // namespace

double pinch_residual(const Trace& w) {
    const auto crossings = phi_crossings(w);
    if (crossings.size() < 2) {
        throw NumericError("pinch_residual: fewer than 2 phi zero crossings in the window");
    }
    const double i_max = max_abs(w.i);
    if (i_max == 0.0) return 0.0;
    double worst = 0.0;
    for (const auto& c : crossings) {
        const double i_at = w.i[c.index] + c.frac * (w.i[c.index + 1] - w.i[c.index]);
        worst = std::max(worst, std::fabs(i_at));
    }
    return worst / i_max;
}

std::pair<double, double> lobe_areas(const Trace& w) {
    const auto crossings = phi_crossings(w);
    if (crossings.empty()) {
        throw NumericError("lobe_areas: no phi zero crossings in the window");
    }

    // Closed-loop shoelace with the crossing points inserted as vertices, so
    // each trapezoid contributes entirely to the lobe its segment lies in.
    double pos = 0.0, neg = 0.0;
    const std::size_t n = w.size();
    auto accumulate = [&](double phi0, double i0, double phi1, double i1) {
        const double area = 0.5 * (i0 + i1) * (phi1 - phi0);
        const double mid = 0.5 * (phi0 + phi1);
        (mid >= 0.0 ? pos : neg) += area;
    };

    std::size_t c_idx = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k1 = (k + 1) % n;  // wrap: the window is one period
        double phi0 = w.phi[k], i0 = w.i[k];
        const double phi1 = w.phi[k1], i1 = w.i[k1];
        if (k1 != 0 && c_idx < crossings.size() && crossings[c_idx].index == k &&
            crossings[c_idx].frac > 0.0) {
            const double f = crossings[c_idx].frac;
            const double phic = phi0 + f * (phi1 - phi0);
            const double ic = i0 + f * (i1 - i0);
            accumulate(phi0, i0, phic, ic);
            phi0 = phic;
            i0 = ic;
        }
        if (c_idx < crossings.size() && crossings[c_idx].index == k) ++c_idx;
        accumulate(phi0, i0, phi1, i1);
    }
    return {pos, neg};
}

double q_rho_single_valuedness(const Trace& w) {
    constexpr int kBins = 100;
    const auto [rho_min_it, rho_max_it] = std::minmax_element(w.rho.begin(), w.rho.end());
    const double rho_min = *rho_min_it, rho_max = *rho_max_it;
    if (rho_max - rho_min < 1e-18) {
        throw NumericError("q_rho_single_valuedness: rho range degenerate (< 1e-18 Wb*s)");
    }
    const auto [q_min_it, q_max_it] = std::minmax_element(w.q.begin(), w.q.end());
    const double q_range = *q_max_it - *q_min_it;
    if (q_range == 0.0) return 0.0;

    struct Bin {
        double sr = 0, sq = 0, srr = 0, srq = 0;
        std::vector<std::pair<double, double>> pts;
    };
    std::vector<Bin> bins(kBins);
    const double scale = kBins / (rho_max - rho_min);
    for (std::size_t k = 0; k < w.size(); ++k) {
        int bi = static_cast<int>((w.rho[k] - rho_min) * scale);
        bi = std::clamp(bi, 0, kBins - 1);
        auto& bin = bins[bi];
        bin.sr += w.rho[k];
        bin.sq += w.q[k];
        bin.srr += w.rho[k] * w.rho[k];
        bin.srq += w.rho[k] * w.q[k];
        bin.pts.emplace_back(w.rho[k], w.q[k]);
    }

    double spread = 0.0;
    for (const auto& bin : bins) {
        const auto m = static_cast<double>(bin.pts.size());
        if (m < 2.0) continue;
        // Least-squares line inside the bin; the residual range detects
        // branch separation without charging the slope against it.
        const double det = m * bin.srr - bin.sr * bin.sr;
        double slope = 0.0;
        if (std::fabs(det) > 0.0) slope = (m * bin.srq - bin.sr * bin.sq) / det;
        const double intercept = (bin.sq - slope * bin.sr) / m;
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (const auto& [r, qv] : bin.pts) {
            const double res = qv - (slope * r + intercept);
            if (first) {
                lo = hi = res;
                first = false;
            } else {
                lo = std::min(lo, res);
                hi = std::max(hi, res);
            }
        }
        spread = std::max(spread, (hi - lo) / q_range);
    }
    return spread;
}

LoopMetrics loop_metrics(const Trace& one_period_window) {
    LoopMetrics m;
    // Close the loop before the pinch measurement: the crossing at the
    // window boundary lives in the wrap segment.
    Trace closed = one_period_window;
    if (closed.size() >= 2) {
        closed.push(closed.t.back() + closed.dt, closed.vin.front(), closed.phi.front(),
                    closed.rho.front(), closed.q.front(), closed.i.front(), closed.linv.front());
    }
    m.pinch_residual = pinch_residual(closed);
    std::tie(m.lobe_area_pos, m.lobe_area_neg) = lobe_areas(one_period_window);
    const double phi_max = max_abs(one_period_window.phi);
    const double i_max = max_abs(one_period_window.i);
    const double mean_lobe = 0.5 * (std::fabs(m.lobe_area_pos) + std::fabs(m.lobe_area_neg));
    m.area_normalized = (phi_max > 0.0 && i_max > 0.0) ? mean_lobe / (phi_max * i_max) : 0.0;
    m.qr_spread = q_rho_single_valuedness(one_period_window);
    return m;
}

AreaProfile area_frequency_profile(const EmulatorConfig& cfg, double src_amplitude,
                                   const std::vector<double>& freqs, SweepHold hold,
                                   int settle_periods) {
    if (freqs.size() < 3) {
        throw ConfigError("area_frequency_profile: need at least 3 frequencies");
    }
    for (std::size_t k = 0; k + 1 < freqs.size(); ++k) {
        if (!(freqs[k] < freqs[k + 1])) {
            throw ConfigError("area_frequency_profile: frequencies must be strictly increasing");
        }
    }

    const double c1f = cfg.C1 * freqs.front();  // held product for C1fConst
    AreaProfile profile;
    profile.points.reserve(freqs.size());
    for (double f : freqs) {
        EmulatorConfig point_cfg = cfg;
        if (hold == SweepHold::C1fConst) point_cfg.C1 = c1f / f;

        SourceSpec src;
        src.kind = SourceSpec::Kind::Sine;
        src.tones = {Tone{src_amplitude, f, 0.0}};
        src.dc_flux_removal = true;

        const double dt = default_dt(src);
        const Trace trace = integrate(point_cfg, src, (settle_periods + 4) / f, dt);
        const Trace window = steady_window(trace, f, 1);
        const LoopMetrics m = loop_metrics(window);
        profile.points.push_back({f, m.area_normalized, m.pinch_residual});
    }

    profile.monotone_decreasing = hold == SweepHold::CFixed;
    if (hold == SweepHold::CFixed) {
        for (std::size_t k = 0; k + 1 < profile.points.size(); ++k) {
            if (!(profile.points[k + 1].area_normalized < profile.points[k].area_normalized)) {
                profile.monotone_decreasing = false;
                break;
            }
        }
    }
    return profile;
}

} // namespace memsim
