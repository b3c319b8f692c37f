#include "memsim/config.hpp"
#include "memsim/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <optional>
#include <set>

namespace memsim {

namespace {

using nlohmann::json;

/// Strict object reader: every accessed key is tracked and finish() rejects
/// whatever was not consumed, reporting its JSON path.
class ObjReader {
public:
    ObjReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) {
            throw ConfigError("schema error at " + path_ + ": expected an object");
        }
    }

    bool has(const char* key) const { return node_.contains(key); }

    const json* child(const char* key) {
        used_.insert(key);
        auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    double number(const char* key, double def) {
        const json* v = child(key);
        if (!v) return def;
        if (!v->is_number()) fail(key, "must be a number");
        return v->get<double>();
    }

    double positive(const char* key, double def) {
        const json* v = child(key);
        if (!v) return def;
        if (!v->is_number()) fail(key, "must be a number");
        const double x = v->get<double>();
        if (!(x > 0.0)) fail(key, "must be > 0");
        return x;
    }

    double non_negative(const char* key, double def) {
        const json* v = child(key);
        if (!v) return def;
        if (!v->is_number()) fail(key, "must be a number");
        const double x = v->get<double>();
        if (!(x >= 0.0)) fail(key, "must be >= 0");
        return x;
    }

    int integer(const char* key, int def) {
        const json* v = child(key);
        if (!v) return def;
        if (!v->is_number_integer()) fail(key, "must be an integer");
        return v->get<int>();
    }

    std::uint64_t uint64(const char* key, std::uint64_t def) {
        const json* v = child(key);
        if (!v) return def;
        if (!v->is_number_unsigned() && !v->is_number_integer()) fail(key, "must be an integer");
        return v->get<std::uint64_t>();
    }

    bool boolean(const char* key, bool def) {
        const json* v = child(key);
        if (!v) return def;
        if (!v->is_boolean()) fail(key, "must be a boolean");
        return v->get<bool>();
    }

    std::string text(const char* key, const std::string& def) {
        const json* v = child(key);
        if (!v) return def;
        if (!v->is_string()) fail(key, "must be a string");
        return v->get<std::string>();
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            if (!used_.contains(it.key())) {
                throw ConfigError("schema error at " + path_ + "/" + it.key() + ": unknown key");
            }
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError("schema error at " + path_ + "/" + key + ": " + what);
    }

    const std::string& path() const { return path_; }
    const json& node() const { return node_; }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> used_;
};

void parse_ota(const json* node, const std::string& path, OtaParams& p) {
    if (!node) return;
    ObjReader r(*node, path);
    p.k = r.positive("k", p.k);
    p.Vth = r.number("Vth", p.Vth);
    p.Vss = r.number("Vss", p.Vss);
    p.Vdd = r.number("Vdd", p.Vdd);
    p.Vb = r.number("Vb", p.Vb);
    p.omega_a = r.positive("omega_a", p.omega_a);
    p.tau = r.non_negative("tau", p.tau);
    p.Ro = r.positive("Ro", p.Ro);
    p.Co = r.non_negative("Co", p.Co);
    p.Ci = r.non_negative("Ci", p.Ci);
    r.finish();
}

MosPair parse_mos_pair(const json* node, const std::string& path) {
    MosPair pair;
    if (!node) return pair;
    ObjReader r(*node, path);
    pair.mu_cox_n = r.positive("mu_cox_n", pair.mu_cox_n);
    pair.wl_ratio_n = r.positive("wl_ratio_n", pair.wl_ratio_n);
    pair.mu_cox_p = r.positive("mu_cox_p", pair.mu_cox_p);
    pair.wl_ratio_p = r.positive("wl_ratio_p", pair.wl_ratio_p);
    r.finish();
    return pair;
}

void parse_ccii(const json* node, const std::string& path, CcciiParams& p) {
    if (!node) return;
    ObjReader r(*node, path);
    const bool has_rx = r.has("Rx");
    const bool has_ib = r.has("Ib");
    if (has_rx && has_ib) {
        throw ConfigError("schema error at " + path + ": Rx and Ib are mutually exclusive");
    }
    if (has_ib) {
        const double ib = r.positive("Ib", 0.0);
        const MosPair pair = parse_mos_pair(r.child("mos_pair"), path + "/mos_pair");
        set_rx_from_bias(p, ib, pair);
    } else {
        if (r.has("mos_pair")) {
            throw ConfigError("schema error at " + path + "/mos_pair: requires Ib");
        }
        p.Rx = r.non_negative("Rx", p.Rx);
    }
    p.Lx = r.non_negative("Lx", p.Lx);
    p.Ry = r.positive("Ry", p.Ry);
    p.Cy = r.non_negative("Cy", p.Cy);
    p.Rz = r.positive("Rz", p.Rz);
    p.Cz = r.non_negative("Cz", p.Cz);
    p.beta0 = r.positive("beta0", p.beta0);
    p.alpha0 = r.positive("alpha0", p.alpha0);
    p.omega_beta = r.positive("omega_beta", p.omega_beta);
    p.omega_alpha = r.positive("omega_alpha", p.omega_alpha);
    r.finish();
}

void parse_emulator(const json* node, const std::string& path, EmulatorConfig& cfg) {
    if (!node) return;
    ObjReader r(*node, path);
    const std::string topology = r.text("topology", "grounded");
    if (topology == "grounded") cfg.topology = Topology::Grounded;
    else if (topology == "floating") cfg.topology = Topology::Floating;
    else r.fail("topology", "must be \"grounded\" or \"floating\"");

    const std::string mode = r.text("mode", "incremental");
    if (mode == "incremental") cfg.mode = Mode::Incremental;
    else if (mode == "decremental") cfg.mode = Mode::Decremental;
    else r.fail("mode", "must be \"incremental\" or \"decremental\"");

    const std::string fidelity = r.text("fidelity", "simplified");
    if (fidelity == "simplified") cfg.fidelity = Fidelity::Simplified;
    else if (fidelity == "full_ideal") cfg.fidelity = Fidelity::FullIdeal;
    else if (fidelity == "non_ideal") cfg.fidelity = Fidelity::NonIdeal;
    else r.fail("fidelity", "must be \"simplified\", \"full_ideal\" or \"non_ideal\"");

    cfg.R1 = r.positive("R1", cfg.R1);
    cfg.C1 = r.positive("C1", cfg.C1);
    cfg.C2 = r.positive("C2", cfg.C2);
    parse_ota(r.child("ota3"), path + "/ota3", cfg.ota3);
    parse_ota(r.child("ota4"), path + "/ota4", cfg.ota4);
    parse_ccii(r.child("ccii1"), path + "/ccii1", cfg.ccii1);
    parse_ccii(r.child("cccii2"), path + "/cccii2", cfg.cccii2);
    r.finish();
}

Tone parse_tone(const json& node, const std::string& path, bool with_phase = true) {
    ObjReader r(node, path);
    Tone tone;
    tone.amplitude = r.non_negative("amplitude", 0.0);
    tone.frequency = r.positive("frequency", 0.0);
    tone.phase = with_phase ? r.number("phase", 0.0) : 0.0;
    r.finish();
    return tone;
}

void parse_source(const json* node, const std::string& path, SourceSpec& src) {
    if (!node) return;
    ObjReader r(*node, path);
    const std::string kind = r.text("kind", "sine");
    src.dc_flux_removal = r.boolean("dc_flux_removal", src.dc_flux_removal);
    if (kind == "sine") {
        src.kind = SourceSpec::Kind::Sine;
        Tone tone;
        tone.amplitude = r.non_negative("amplitude", 0.14);
        tone.frequency = r.positive("frequency", 1e6);
        tone.phase = r.number("phase", 0.0);
        src.tones = {tone};
    } else if (kind == "multi_tone") {
        src.kind = SourceSpec::Kind::MultiTone;
        const json* tones = r.child("tones");
        if (!tones || !tones->is_array() || tones->empty()) {
            r.fail("tones", "must be a non-empty array");
        }
        src.tones.clear();
        for (std::size_t k = 0; k < tones->size(); ++k) {
            src.tones.push_back(parse_tone((*tones)[k], path + "/tones/" + std::to_string(k)));
        }
    } else if (kind == "samples") {
        src.kind = SourceSpec::Kind::Samples;
        src.sample_dt = r.positive("sample_dt", 0.0);
        const json* values = r.child("values");
        if (!values || !values->is_array() || values->size() < 2) {
            r.fail("values", "must be an array of at least 2 numbers");
        }
        src.samples.clear();
        for (const auto& v : *values) {
            if (!v.is_number()) r.fail("values", "must contain only numbers");
            src.samples.push_back(v.get<double>());
        }
    } else {
        r.fail("kind", "must be \"sine\", \"multi_tone\" or \"samples\"");
    }
    r.finish();
}

SigmaPair parse_sigma_pair(const json& node, const std::string& path) {
    if (!node.is_array() || node.size() != 2 || !node[0].is_number() || !node[1].is_number()) {
        throw ConfigError("schema error at " + path + ": must be [process_sigma, mismatch_sigma]");
    }
    SigmaPair p{node[0].get<double>(), node[1].get<double>()};
    if (!(p.process >= 0.0 && p.mismatch >= 0.0)) {
        throw ConfigError("schema error at " + path + ": sigmas must be >= 0");
    }
    return p;
}

void parse_mc(const json& node, const std::string& path, DeviationSpec& spec,
              std::vector<std::string>& warnings) {
    ObjReader r(node, path);
    spec.n_runs = r.integer("n_runs", spec.n_runs);
    if (spec.n_runs < 1) r.fail("n_runs", "must be >= 1");
    spec.seed = r.uint64("seed", spec.seed);
    spec.pinch_threshold = r.positive("pinch_threshold", spec.pinch_threshold);
    if (const json* dev = r.child("deviations")) {
        ObjReader d(*dev, path + "/deviations");
        if (const json* v = d.child("tox")) spec.tox = parse_sigma_pair(*v, path + "/deviations/tox");
        if (const json* v = d.child("Vth")) spec.vth = parse_sigma_pair(*v, path + "/deviations/Vth");
        if (const json* v = d.child("L")) spec.length = parse_sigma_pair(*v, path + "/deviations/L");
        if (const json* v = d.child("W")) spec.width = parse_sigma_pair(*v, path + "/deviations/W");
        // Junction-capacitance rows have no carrier in the behavioral model;
        // accept them but say so instead of silently absorbing.
        for (const char* key : {"Cjn", "Cjswn", "Cjswgn", "Cgon", "hdifn"}) {
            if (const json* v = d.child(key)) {
                parse_sigma_pair(*v, path + "/deviations/" + key);
                warnings.push_back(std::string("deviations/") + key +
                                   " accepted but ignored: no carrier in the behavioral model");
            }
        }
        d.finish();
    }
    if (const json* geo = r.child("base_geometry")) {
        ObjReader g(*geo, path + "/base_geometry");
        spec.base_tox = g.positive("tox", spec.base_tox);
        spec.base_width = g.positive("W", spec.base_width);
        spec.base_length = g.positive("L", spec.base_length);
        g.finish();
    }
    r.finish();
}

void parse_biquad(const json* node, const std::string& path, BiquadSpec& spec) {
    if (!node) return;
    ObjReader r(*node, path);
    spec.f0 = r.positive("f0", spec.f0);
    spec.Q = r.positive("Q", spec.Q);
    r.finish();
}

void parse_am(const json& node, const std::string& path, AmConfig& am) {
    ObjReader r(node, path);
    if (const json* m = r.child("message")) am.message = parse_tone(*m, path + "/message", false);
    if (const json* c = r.child("carrier")) am.carrier = parse_tone(*c, path + "/carrier", false);
    if (const json* l = r.child("local_carrier")) {
        am.local_carrier = parse_tone(*l, path + "/local_carrier");
    } else {
        am.local_carrier.frequency = am.carrier.frequency;
    }
    am.bpf.f0 = am.carrier.frequency;
    parse_biquad(r.child("bpf"), path + "/bpf", am.bpf);
    parse_biquad(r.child("lpf"), path + "/lpf", am.lpf);
    r.finish();
}

} // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

const char* experiment_kind_name(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::Run: return "run";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::Mc: return "mc";
    case ExperimentKind::Am: return "am";
    case ExperimentKind::Compose: return "compose";
    }
    return "?";
}

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("parse error: ") + e.what());
    }

    ExperimentConfig cfg;
    ObjReader root(doc, "");
    parse_emulator(root.child("emulator"), "/emulator", cfg.emulator);
    parse_source(root.child("source"), "/source", cfg.source);

    if (const json* sim = root.child("sim")) {
        ObjReader r(*sim, "/sim");
        cfg.sim.t_end = r.positive("t_end", 0.0);
        cfg.sim.dt = r.positive("dt", 0.0);
        cfg.sim.steady_periods = r.integer("steady_periods", cfg.sim.steady_periods);
        if (cfg.sim.steady_periods < 1) r.fail("steady_periods", "must be >= 1");
        r.finish();
    }

    const json* experiment = root.child("experiment");
    if (!experiment) {
        throw ConfigError("schema error at /experiment: required");
    }
    ObjReader ex(*experiment, "/experiment");
    int blocks = 0;
    if (const json* run = ex.child("run")) {
        ObjReader r(*run, "/experiment/run");
        r.finish();
        cfg.kind = ExperimentKind::Run;
        ++blocks;
    }
    if (const json* sweep = ex.child("sweep")) {
        cfg.kind = ExperimentKind::Sweep;
        ++blocks;
        ObjReader r(*sweep, "/experiment/sweep");
        const json* freqs = r.child("frequencies");
        if (!freqs || !freqs->is_array() || freqs->size() < 3) {
            r.fail("frequencies", "must be an array of at least 3 frequencies");
        }
        for (const auto& f : *freqs) {
            if (!f.is_number() || !(f.get<double>() > 0.0)) {
                r.fail("frequencies", "entries must be > 0");
            }
            cfg.sweep.frequencies.push_back(f.get<double>());
        }
        for (std::size_t k = 0; k + 1 < cfg.sweep.frequencies.size(); ++k) {
            if (!(cfg.sweep.frequencies[k] < cfg.sweep.frequencies[k + 1])) {
                r.fail("frequencies", "must be strictly increasing");
            }
        }
        const std::string hold = r.text("hold", "c_fixed");
        if (hold == "c_fixed") cfg.sweep.hold = SweepHold::CFixed;
        else if (hold == "c1f_const") cfg.sweep.hold = SweepHold::C1fConst;
        else r.fail("hold", "must be \"c_fixed\" or \"c1f_const\"");
        r.finish();
    }
    if (const json* mc = ex.child("mc")) {
        cfg.kind = ExperimentKind::Mc;
        ++blocks;
        parse_mc(*mc, "/experiment/mc", cfg.mc, cfg.warnings);
    }
    if (const json* am = ex.child("am")) {
        cfg.kind = ExperimentKind::Am;
        ++blocks;
        parse_am(*am, "/experiment/am", cfg.am);
        cfg.am.emulator = cfg.emulator;
    }
    if (const json* compose = ex.child("compose")) {
        cfg.kind = ExperimentKind::Compose;
        ++blocks;
        ObjReader r(*compose, "/experiment/compose");
        const std::string wiring = r.text("wiring", "parallel");
        if (wiring == "parallel") cfg.compose.wiring = Wiring::ParallelSamePolarity;
        else if (wiring == "series") cfg.compose.wiring = Wiring::SeriesSamePolarity;
        else r.fail("wiring", "must be \"parallel\" or \"series\"");
        cfg.compose.element2 = cfg.emulator;
        parse_emulator(r.child("element2"), "/experiment/compose/element2", cfg.compose.element2);
        r.finish();
    }
    ex.finish();
    if (blocks != 1) {
        throw ConfigError("schema error at /experiment: exactly one of run/sweep/mc/am/compose");
    }
    root.finish();

    cfg.emulator.validate();
    cfg.source.validate();
    cfg.config_hash = fnv1a64(doc.dump());
    return cfg;
}

} // namespace memsim
