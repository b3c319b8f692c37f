#include <catch2/catch_amalgamated.hpp>

#include "memsim/errors.hpp"
#include "memsim/montecarlo.hpp"

#include <cmath>

using namespace memsim;
using Catch::Approx;

namespace {

EmulatorConfig mc_base(Fidelity fidelity = Fidelity::FullIdeal) {
    EmulatorConfig cfg;
    cfg.fidelity = fidelity;
    cfg.ota4.Vb = 0.45;
    set_rx_from_bias(cfg.cccii2, 20e-6);
    return cfg;
}

SourceSpec mc_source() {
    SourceSpec src;
    src.tones = {Tone{0.14, 1e6, 0.0}};
    return src;
}

DeviationSpec table5(int n_runs, std::uint64_t seed) {
    DeviationSpec spec;  // defaults carry the published deviation rows
    spec.n_runs = n_runs;
    spec.seed = seed;
    return spec;
}

} // namespace

TEST_CASE("sample_variation determinism and degenerate limits", "[montecarlo]") {
    const EmulatorConfig base = mc_base();

    SECTION("zero sigmas return the base config") {
        DeviationSpec spec = table5(1, 7);
        spec.tox = spec.vth = spec.length = spec.width = SigmaPair{0.0, 0.0};
        const EmulatorConfig cfg = sample_variation(base, spec, 0);
        CHECK(cfg.ota4.k == base.ota4.k);
        CHECK(cfg.ota4.Vth == base.ota4.Vth);
        CHECK(cfg.ota3.k == base.ota3.k);
    }

    SECTION("same (seed, run_index) twice gives identical configs") {
        const DeviationSpec spec = table5(10, 42);
        const EmulatorConfig a = sample_variation(base, spec, 3);
        const EmulatorConfig b = sample_variation(base, spec, 3);
        CHECK(a.ota4.k == b.ota4.k);
        CHECK(a.ota4.Vth == b.ota4.Vth);
        CHECK(a.ota3.Vth == b.ota3.Vth);
    }

    SECTION("different run indices decorrelate") {
        const DeviationSpec spec = table5(10, 42);
        const EmulatorConfig a = sample_variation(base, spec, 0);
        const EmulatorConfig b = sample_variation(base, spec, 1);
        CHECK(a.ota4.Vth != b.ota4.Vth);
    }

    SECTION("impossible saturation validity errors out after redraws") {
        EmulatorConfig bad = base;
        bad.ota4.Vb = bad.ota4.Vss + 2.0 * bad.ota4.Vth - 1.0;  // hopeless bias
        DeviationSpec spec = table5(1, 1);
        spec.tox = spec.vth = spec.length = spec.width = SigmaPair{0.0, 0.0};
        CHECK_THROWS_AS(sample_variation(bad, spec, 0), NumericError);
    }
}

TEST_CASE("sampled statistics track the configured sigmas", "[montecarlo]") {
    const EmulatorConfig base = mc_base();
    const DeviationSpec spec = table5(200, 42);

    std::vector<double> vths;
    vths.reserve(200);
    for (int run = 0; run < 200; ++run) {
        vths.push_back(sample_variation(base, spec, run).ota4.Vth);
    }
    double mean = 0.0;
    for (double v : vths) mean += v;
    mean /= 200.0;
    double ss = 0.0;
    for (double v : vths) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / 199.0);

    // Combined per-device sigma: sqrt(0.04^2 + 0.004^2)
    const double expect = 0.04019950248448356;
    CHECK(std::fabs(sigma / expect - 1.0) < 0.15);
    CHECK(std::fabs(mean - base.ota4.Vth) < 3.0 * expect / std::sqrt(200.0));

    SECTION("sampled k mean stays within 3 sigma/sqrt(n) of the base") {
        std::vector<double> ks;
        ks.reserve(200);
        for (int run = 0; run < 200; ++run) {
            ks.push_back(sample_variation(base, spec, run).ota4.k);
        }
        double k_mean = 0.0;
        for (double v : ks) k_mean += v;
        k_mean /= 200.0;
        double k_ss = 0.0;
        for (double v : ks) k_ss += (v - k_mean) * (v - k_mean);
        const double k_sigma = std::sqrt(k_ss / 199.0);
        CHECK(std::fabs(k_mean - base.ota4.k) < 3.0 * k_sigma / std::sqrt(200.0));
    }
}

TEST_CASE("run_batch aggregates and reproduces", "[montecarlo]") {
    const EmulatorConfig base = mc_base();
    const SourceSpec src = mc_source();

    SECTION("zero sigmas: all runs identical, sigma zero, everything pinched") {
        DeviationSpec spec = table5(6, 5);
        spec.tox = spec.vth = spec.length = spec.width = SigmaPair{0.0, 0.0};
        const McReport report = run_batch(base, src, spec);
        REQUIRE(report.records.size() == 6);
        for (const auto& rec : report.records) {
            REQUIRE(rec.ok);
            CHECK(rec.pinch_residual == report.records.front().pinch_residual);
            CHECK(rec.vth == base.ota4.Vth);
        }
        CHECK(report.vth_sigma == 0.0);
        CHECK(report.pinched_fraction == 1.0);
    }

    SECTION("thread count does not change the report") {
        const DeviationSpec spec = table5(8, 11);
        const McReport serial = run_batch(base, src, spec, 1);
        const McReport parallel = run_batch(base, src, spec, 4);
        REQUIRE(serial.records.size() == parallel.records.size());
        for (std::size_t k = 0; k < serial.records.size(); ++k) {
            REQUIRE(serial.records[k].ok == parallel.records[k].ok);
            REQUIRE(serial.records[k].vth == parallel.records[k].vth);
            REQUIRE(serial.records[k].k == parallel.records[k].k);
            REQUIRE(serial.records[k].pinch_residual == parallel.records[k].pinch_residual);
            REQUIRE(serial.records[k].lobe_area_pos == parallel.records[k].lobe_area_pos);
        }
        CHECK(serial.vth_sigma == parallel.vth_sigma);
        CHECK(serial.pinched_fraction == parallel.pinched_fraction);
    }

    SECTION("histograms cover all ok runs with 20 bins") {
        const DeviationSpec spec = table5(12, 3);
        const McReport report = run_batch(base, src, spec);
        REQUIRE(report.vth_hist.counts.size() == 20);
        int total = 0;
        for (int c : report.vth_hist.counts) total += c;
        CHECK(total == 12);
        CHECK(report.vth_hist.lo < report.vth_hist.hi);
    }
}
