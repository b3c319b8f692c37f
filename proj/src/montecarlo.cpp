#include "memsim/montecarlo.hpp"
#include "memsim/errors.hpp"
#include "memsim/integrate.hpp"
#include "memsim/trace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace memsim {

namespace {

struct DeviceDraw {
    double d_tox = 0.0, d_vth = 0.0, d_len = 0.0, d_wid = 0.0;
};

// Effective per-block deviations: one shared process draw plus the block's
// own mismatch draw. Block order is fixed (ota3 then ota4) so a draw is a
// pure function of (seed, run_index).
struct RunDraw {
    DeviceDraw ota3, ota4;
};

RunDraw draw_run(const DeviationSpec& spec, int run_index, int attempt) {
    std::seed_seq seq{spec.seed,
                      static_cast<std::uint64_t>(run_index),
                      static_cast<std::uint64_t>(attempt),
                      std::uint64_t{0x6d656d73696dULL}};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> unit(0.0, 1.0);

    DeviceDraw process;
    process.d_tox = spec.tox.process * unit(rng);
    process.d_vth = spec.vth.process * unit(rng);
    process.d_len = spec.length.process * unit(rng);
    process.d_wid = spec.width.process * unit(rng);

    RunDraw run;
    for (DeviceDraw* block : {&run.ota3, &run.ota4}) {
        block->d_tox = process.d_tox + spec.tox.mismatch * unit(rng);
        block->d_vth = process.d_vth + spec.vth.mismatch * unit(rng);
        block->d_len = process.d_len + spec.length.mismatch * unit(rng);
        block->d_wid = process.d_wid + spec.width.mismatch * unit(rng);
    }
    return run;
}

void apply_draw(OtaParams& p, const DeviceDraw& d, const DeviationSpec& spec) {
    p.Vth += d.d_vth;
    // k = mu*(eps_ox/tox)*(W/L); scale relative to the base geometry.
    const double scale = (spec.base_tox / (spec.base_tox + d.d_tox)) *
                         ((spec.base_width + d.d_wid) / spec.base_width) *
                         (spec.base_length / (spec.base_length + d.d_len));
    p.k *= scale;
}

bool saturation_ok(const EmulatorConfig& cfg) {
    if (-cfg.ota3.Vss - 2.0 * cfg.ota3.Vth < 0.0) return false;
    if (cfg.ota4.Vb - cfg.ota4.Vss - 2.0 * cfg.ota4.Vth < 0.0) return false;
    return true;
}

Histogram make_histogram(const std::vector<double>& values) {
    constexpr int kBins = 20;
    Histogram h;
    h.counts.assign(kBins, 0);
    if (values.empty()) return h;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    h.lo = *lo_it;
    h.hi = *hi_it;
    const double span = h.hi - h.lo;
    for (double v : values) {
        int bin = span > 0.0 ? static_cast<int>((v - h.lo) / span * kBins) : 0;
        h.counts[std::clamp(bin, 0, kBins - 1)] += 1;
    }
    return h;
}

std::pair<double, double> mean_sigma(const std::vector<double>& values) {
    if (values.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

} // namespace

void DeviationSpec::validate() const {
    auto check = [](const SigmaPair& p, const char* name) {
        if (!(p.process >= 0.0 && p.mismatch >= 0.0)) {
            throw ConfigError(std::string("DeviationSpec: negative sigma for ") + name);
        }
    };
    check(tox, "tox");
    check(vth, "Vth");
    check(length, "L");
    check(width, "W");
    if (n_runs < 1) throw ConfigError("DeviationSpec: n_runs must be >= 1");
    if (!(base_tox > 0.0 && base_width > 0.0 && base_length > 0.0)) {
        throw ConfigError("DeviationSpec: base geometry must be positive");
    }
}

EmulatorConfig sample_variation(const EmulatorConfig& base, const DeviationSpec& spec,
                                int run_index) {
    spec.validate();
    for (int attempt = 0; attempt < 100; ++attempt) {
        const RunDraw draw = draw_run(spec, run_index, attempt);
        EmulatorConfig cfg = base;
        apply_draw(cfg.ota3, draw.ota3, spec);
        apply_draw(cfg.ota4, draw.ota4, spec);
        if (saturation_ok(cfg)) return cfg;
    }
    throw NumericError("sample_variation: run " + std::to_string(run_index) +
                       " exhausted 100 redraws without satisfying saturation validity");
}

McReport run_batch(const EmulatorConfig& base, const SourceSpec& src, const DeviationSpec& spec,
                   int threads) {
    spec.validate();
    src.validate();
    base.validate();

    const double f = source_max_frequency(src);
    const double dt = default_dt(src);
    const double t_end = 12.0 / f;

    McReport report;
    report.records.assign(static_cast<std::size_t>(spec.n_runs), McRecord{});

    auto run_one = [&](int idx) {
        McRecord rec;
        rec.run_index = idx;
        try {
            const EmulatorConfig cfg = sample_variation(base, spec, idx);
            rec.vth = cfg.ota4.Vth;
            rec.k = cfg.ota4.k;
            const Trace trace = integrate(cfg, src, t_end, dt);
            const LoopMetrics m = loop_metrics(steady_window(trace, f, 1));
            rec.pinch_residual = m.pinch_residual;
            rec.lobe_area_pos = m.lobe_area_pos;
            rec.lobe_area_neg = m.lobe_area_neg;
            rec.ok = true;
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.error = e.what();
        }
        report.records[static_cast<std::size_t>(idx)] = rec;
    };

    if (threads <= 1) {
        for (int idx = 0; idx < spec.n_runs; ++idx) run_one(idx);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        const int workers = std::min(threads, spec.n_runs);
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int idx = next.fetch_add(1); idx < spec.n_runs; idx = next.fetch_add(1)) {
                    run_one(idx);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    std::vector<double> vths, ks;
    int ok_count = 0, pinched = 0;
    for (const auto& rec : report.records) {
        if (!rec.ok) continue;
        ++ok_count;
        vths.push_back(rec.vth);
        ks.push_back(rec.k);
        if (rec.pinch_residual < spec.pinch_threshold) ++pinched;
    }
    std::tie(report.vth_mean, report.vth_sigma) = mean_sigma(vths);
    std::tie(report.k_mean, report.k_sigma) = mean_sigma(ks);
    report.pinched_fraction = ok_count > 0 ? static_cast<double>(pinched) / ok_count : 0.0;
    report.vth_hist = make_histogram(vths);
    report.k_hist = make_histogram(ks);
    return report;
}

} // namespace memsim
