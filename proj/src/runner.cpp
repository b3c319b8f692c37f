#include "memsim/runner.hpp"
#include "memsim/errors.hpp"
#include "memsim/integrate.hpp"
#include "memsim/version.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace memsim {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + file.string());
}

void write_json(const std::filesystem::path& file, const json& doc) {
    write_file(file, doc.dump(2) + "\n");
}

/// Window frequency for loop metrics: the slowest tone. Samples sources have
/// no declared periodicity, so no window (and no loop metrics).
double metrics_frequency(const SourceSpec& src) {
    if (src.kind == SourceSpec::Kind::Samples) return 0.0;
    double f = src.tones.front().frequency;
    for (const auto& tone : src.tones) f = std::min(f, tone.frequency);
    return f;
}

json metrics_json(const Trace& trace, double f_window, int steady_periods) {
    if (!(f_window > 0.0)) return nullptr;
    const Trace window = steady_window(trace, f_window, steady_periods);
    const Trace one_period = steady_window(trace, f_window, 1);
    const LoopMetrics m = loop_metrics(one_period);
    return json{{"pinch_residual", pinch_residual(window)},
                {"lobe_area_pos_WbA", m.lobe_area_pos},
                {"lobe_area_neg_WbA", m.lobe_area_neg},
                {"area_normalized", m.area_normalized},
                {"qr_spread", m.qr_spread}};
}

json summary_base(const ExperimentConfig& cfg) {
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(cfg.config_hash));
    json doc;
    doc["tool"] = "memsim";
    doc["version"] = kVersion;
    doc["config_hash"] = hash;
    doc["experiment"] = experiment_kind_name(cfg.kind);
    if (!cfg.warnings.empty()) doc["warnings"] = cfg.warnings;
    return doc;
}

void run_plain(const ExperimentConfig& cfg, const ResolvedSim& sim,
               const std::filesystem::path& out_dir) {
    Trace trace = integrate(cfg.emulator, cfg.source, sim.t_end, sim.dt);
    trace.config_hash = cfg.config_hash;
    write_trace_csv(trace, out_dir / "trace.csv");

    json doc = summary_base(cfg);
    const Coefficients c = derive_coefficients(cfg.emulator);
    doc["coefficients"] = {{"a_perH", c.a}, {"b_perH_Wbs", c.b}, {"mode_sign", c.mode_sign}};
    doc["sim"] = {{"t_end_s", sim.t_end}, {"dt_s", sim.dt}, {"steady_periods", sim.steady_periods}};
    doc["metrics"] = metrics_json(trace, metrics_frequency(cfg.source), sim.steady_periods);
    write_json(out_dir / "summary.json", doc);
}

void run_sweep(const ExperimentConfig& cfg, const ResolvedSim& sim,
               const std::filesystem::path& out_dir) {
    Trace trace = integrate(cfg.emulator, cfg.source, sim.t_end, sim.dt);
    trace.config_hash = cfg.config_hash;
    write_trace_csv(trace, out_dir / "trace.csv");

    const double amplitude = cfg.source.tones.front().amplitude;
    const AreaProfile profile =
        area_frequency_profile(cfg.emulator, amplitude, cfg.sweep.frequencies, cfg.sweep.hold);

    std::string csv = "f_Hz,area_normalized,pinch_residual\n";
    json points = json::array();
    for (const auto& p : profile.points) {
        csv += fmt17(p.frequency) + "," + fmt17(p.area_normalized) + "," +
               fmt17(p.pinch_residual) + "\n";
        points.push_back({{"f_Hz", p.frequency},
                          {"area_normalized", p.area_normalized},
                          {"pinch_residual", p.pinch_residual}});
    }
    write_file(out_dir / "sweep.csv", csv);

    json doc = summary_base(cfg);
    doc["sweep"] = {{"hold", cfg.sweep.hold == SweepHold::C1fConst ? "c1f_const" : "c_fixed"},
                    {"monotone_decreasing", profile.monotone_decreasing},
                    {"points", points}};
    write_json(out_dir / "summary.json", doc);
}

std::string histogram_csv(const Histogram& h) {
    std::string csv = "bin_lo,bin_hi,count\n";
    const auto bins = static_cast<double>(h.counts.size());
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        const double lo = h.lo + (h.hi - h.lo) * static_cast<double>(k) / bins;
        const double hi = h.lo + (h.hi - h.lo) * static_cast<double>(k + 1) / bins;
        csv += fmt17(lo) + "," + fmt17(hi) + "," + std::to_string(h.counts[k]) + "\n";
    }
    return csv;
}

void run_mc(const ExperimentConfig& cfg, const ResolvedSim& sim,
            const std::filesystem::path& out_dir, int threads) {
    Trace trace = integrate(cfg.emulator, cfg.source, sim.t_end, sim.dt);
    trace.config_hash = cfg.config_hash;
    write_trace_csv(trace, out_dir / "trace.csv");

    const McReport report = run_batch(cfg.emulator, cfg.source, cfg.mc, threads);

    std::string csv = "run_index,vth_V,k_AperV2,pinch_residual,lobe_area_pos_WbA,lobe_area_neg_WbA,ok\n";
    for (const auto& rec : report.records) {
        csv += std::to_string(rec.run_index) + "," + fmt17(rec.vth) + "," + fmt17(rec.k) + "," +
               fmt17(rec.pinch_residual) + "," + fmt17(rec.lobe_area_pos) + "," +
               fmt17(rec.lobe_area_neg) + "," + (rec.ok ? "1" : "0") + "\n";
    }
    write_file(out_dir / "mc_records.csv", csv);
    write_file(out_dir / "hist_vth.csv", histogram_csv(report.vth_hist));
    write_file(out_dir / "hist_k.csv", histogram_csv(report.k_hist));

    json doc = summary_base(cfg);
    doc["mc"] = {{"n_runs", cfg.mc.n_runs},
                 {"seed", cfg.mc.seed},
                 {"pinch_threshold", cfg.mc.pinch_threshold},
                 {"pinched_fraction", report.pinched_fraction},
                 {"vth_mean_V", report.vth_mean},
                 {"vth_sigma_V", report.vth_sigma},
                 {"k_mean_AperV2", report.k_mean},
                 {"k_sigma_AperV2", report.k_sigma}};
    write_json(out_dir / "summary.json", doc);
}

void run_am(const ExperimentConfig& cfg, const ResolvedSim& sim,
            const std::filesystem::path& out_dir) {
    Trace trace = modulate(cfg.am, sim.t_end, sim.dt);
    trace.config_hash = cfg.config_hash;
    write_trace_csv(trace, out_dir / "trace.csv");

    const double fm = cfg.am.message.frequency;
    const double fc = cfg.am.carrier.frequency;
    const auto n_win = static_cast<std::size_t>(std::llround(4.0 / (fm * sim.dt)));
    if (trace.size() < n_win) throw NumericError("am: trace shorter than the spectrum window");
    const Trace window = trace.slice(trace.size() - n_win, n_win);
    const Spectrum spec = spectrum(window, fm);

    std::string csv = "f_Hz,magnitude_A,magnitude_dB\n";
    for (const auto& bin : spec.bins) {
        const double db = 20.0 * std::log10(std::max(bin.magnitude, 1e-300));
        csv += fmt17(bin.frequency) + "," + fmt17(bin.magnitude) + "," + fmt17(db) + "\n";
    }
    write_file(out_dir / "spectrum.csv", csv);

    const DemodResult demod = demodulate(trace, cfg.am);
    std::string dcsv = "time_s,message_ref,message_est\n";
    for (std::size_t k = 0; k < demod.t.size(); ++k) {
        dcsv += fmt17(demod.t[k]) + "," + fmt17(demod.message_reference[k]) + "," +
                fmt17(demod.message_estimate[k]) + "\n";
    }
    write_file(out_dir / "demod.csv", dcsv);

    // Peak magnitudes at the carrier and both sidebands vs the median floor.
    auto mag_at = [&](double f) {
        const double df = spec.bins.size() > 1 ? spec.bins[1].frequency : 1.0;
        const auto idx = static_cast<std::size_t>(std::llround(f / df));
        return idx < spec.bins.size() ? spec.bins[idx].magnitude : 0.0;
    };
    std::vector<double> floor_mags;
    floor_mags.reserve(spec.bins.size());
    for (std::size_t k = 1; k < spec.bins.size(); ++k) {
        const double f = spec.bins[k].frequency;
        if (std::fabs(f - fc) < 1.5 * fm) continue;
        floor_mags.push_back(spec.bins[k].magnitude);
    }
    std::sort(floor_mags.begin(), floor_mags.end());
    const double floor = floor_mags.empty() ? 0.0 : floor_mags[floor_mags.size() / 2];

    const AmSidebandCoeffs coeffs = sideband_coefficients(cfg.am);
    json doc = summary_base(cfg);
    doc["am"] = {{"correlation", demod.correlation},
                 {"carrier_peak_A", mag_at(fc)},
                 {"lower_sideband_A", mag_at(fc - fm)},
                 {"upper_sideband_A", mag_at(fc + fm)},
                 {"median_floor_A", floor},
                 {"leakage_warning", spec.leakage_warning},
                 {"beta7_A", coeffs.beta7},
                 {"beta8_A", coeffs.beta8},
                 {"beta8p_A", coeffs.beta8p}};
    write_json(out_dir / "summary.json", doc);
}

void run_compose(const ExperimentConfig& cfg, const ResolvedSim& sim,
                 const std::filesystem::path& out_dir) {
    CompositeSpec spec;
    spec.elements = {cfg.emulator, cfg.compose.element2};
    spec.wiring = cfg.compose.wiring;
    spec.drive = cfg.source;

    Trace trace = (spec.wiring == Wiring::ParallelSamePolarity)
                      ? simulate_parallel(spec, sim.t_end, sim.dt)
                      : simulate_series(spec, sim.t_end, sim.dt);
    trace.config_hash = cfg.config_hash;
    write_trace_csv(trace, out_dir / "trace.csv");

    json doc = summary_base(cfg);
    doc["compose"] = {{"wiring", spec.wiring == Wiring::ParallelSamePolarity ? "parallel" : "series"}};
    doc["metrics"] = metrics_json(trace, metrics_frequency(cfg.source), sim.steady_periods);
    doc["sim"] = {{"t_end_s", sim.t_end}, {"dt_s", sim.dt}, {"steady_periods", sim.steady_periods}};
    write_json(out_dir / "summary.json", doc);
}

} // namespace

ResolvedSim resolve_sim(const ExperimentConfig& cfg) {
    ResolvedSim sim;
    sim.steady_periods = cfg.sim.steady_periods;
    if (cfg.kind == ExperimentKind::Am) {
        sim.dt = cfg.sim.dt > 0.0 ? cfg.sim.dt : 1.0 / (2000.0 * cfg.am.carrier.frequency);
        sim.t_end = cfg.sim.t_end > 0.0 ? cfg.sim.t_end : 6.0 / cfg.am.message.frequency;
        return sim;
    }
    sim.dt = cfg.sim.dt > 0.0 ? cfg.sim.dt : default_dt(cfg.source);
    if (cfg.sim.t_end > 0.0) {
        sim.t_end = cfg.sim.t_end;
    } else {
        const double f = metrics_frequency(cfg.source);
        if (!(f > 0.0)) {
            throw ConfigError("sim.t_end is required for sample-based sources");
        }
        sim.t_end = (sim.steady_periods + 8) / f;
    }
    return sim;
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& file) {
    std::string csv = "time_s,vin_V,phi_Wb,rho_Wbs,q_C,i_A,linv_perH\n";
    csv.reserve(csv.size() + trace.size() * 150);
    for (std::size_t k = 0; k < trace.size(); ++k) {
        csv += fmt17(trace.t[k]);
        csv += ',';
        csv += fmt17(trace.vin[k]);
        csv += ',';
        csv += fmt17(trace.phi[k]);
        csv += ',';
        csv += fmt17(trace.rho[k]);
        csv += ',';
        csv += fmt17(trace.q[k]);
        csv += ',';
        csv += fmt17(trace.i[k]);
        csv += ',';
        csv += fmt17(trace.linv[k]);
        csv += '\n';
    }
    write_file(file, csv);
}

Trace read_trace_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty trace file " + file.string());

    Trace trace;
    while (std::getline(in, line)) {
        double v[7];
        const char* p = line.c_str();
        char* end = nullptr;
        for (int c = 0; c < 7; ++c) {
            v[c] = std::strtod(p, &end);
            if (end == p) throw IoError("malformed trace row in " + file.string());
            p = (*end == ',') ? end + 1 : end;
        }
        trace.push(v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
    }
    if (trace.size() >= 2) trace.dt = trace.t[1] - trace.t[0];
    return trace;
}

void run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                    int threads) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());

    const ResolvedSim sim = resolve_sim(cfg);
    switch (cfg.kind) {
    case ExperimentKind::Run: run_plain(cfg, sim, out_dir); break;
    case ExperimentKind::Sweep: run_sweep(cfg, sim, out_dir); break;
    case ExperimentKind::Mc: run_mc(cfg, sim, out_dir, threads); break;
    case ExperimentKind::Am: run_am(cfg, sim, out_dir); break;
    case ExperimentKind::Compose: run_compose(cfg, sim, out_dir); break;
    }
}

} // namespace memsim
